"""Answer normalization, VQA scoring fixtures, and caption grading."""

from __future__ import annotations

import pytest

from cyclebench.model import (
    CaptionObject,
    JudgedAnswer,
    QARecord,
    SceneCaption,
    Value,
)
from cyclebench.scoring import (
    caption_from_scene,
    judge_answers,
    match_objects,
    normalize_value,
    score_captioning,
    score_vqa,
)
from cyclebench.model import ColorChange, Orbit, SizeChange, Vec3
from tests.test_model import make_graph, make_object
from tests.test_questions import cyc, program


def record(question_id, answer, answer_kind, template_id="existence",
           tier="L1"):
    ops = {"yes_no": ("exist", (), (0,)), "integer": ("count", (), (0,)),
           "attribute": None}
    if answer_kind == "attribute":
        prog = program(("scene", (), ()), ("unique", (), (0,)),
                       ("query_color", (), (1,)))
    else:
        prog = program(("scene", (), ()), ops[answer_kind])
    return QARecord(question_id=question_id, scene_id="t", tier=tier,
                    template_id=template_id, quantifier="none",
                    question="Is there anything?", answer=answer,
                    answer_kind=answer_kind, program=prog)


class TestNormalize:
    def test_yes_no_words(self):
        assert normalize_value("Yes.", "yes_no") is True
        assert normalize_value("  TRUE ", "yes_no") is True
        assert normalize_value("n", "yes_no") is False
        assert normalize_value("maybe", "yes_no") is None

    def test_native_bool_only_fits_yes_no(self):
        assert normalize_value(True, "yes_no") is True
        # bool is an int subclass; it must not leak into integer answers
        assert normalize_value(True, "integer") is None

    def test_integers_as_digits_and_words(self):
        assert normalize_value("3", "integer") == 3
        assert normalize_value("three", "integer") == 3
        assert normalize_value(7, "integer") == 7
        assert normalize_value("a few", "integer") is None
        assert normalize_value(4, "yes_no") is None

    def test_attribute_synonyms_and_cleanup(self):
        assert normalize_value("counter-clockwise", "attribute") == "counterclockwise"
        assert normalize_value("Grey", "attribute") == "gray"
        assert normalize_value("ball", "attribute") == "sphere"
        assert normalize_value(" CUBE. ", "attribute") == "cube"

    def test_garbage_is_indefinite(self):
        assert normalize_value(None, "attribute") is None
        assert normalize_value("", "yes_no") is None
        assert normalize_value(["yes"], "yes_no") is None


class TestJudgeAnswers:
    def test_missing_ids_become_indefinite(self):
        records = [record("q0", Value.boolean(True), "yes_no"),
                   record("q1", Value.boolean(False), "yes_no")]
        judged = judge_answers(records, {"q0": "yes"})
        assert judged[0].value == Value.boolean(True)
        assert judged[1].is_indefinite


class TestScoreVQA:
    def test_two_of_three_accuracy(self):
        records = [record(f"q{i}", Value.boolean(True), "yes_no")
                   for i in range(3)]
        judged = judge_answers(records, {"q0": "yes", "q1": "yes", "q2": "no"})
        scores = score_vqa(records, judged)
        assert scores["n"] == 3 and scores["correct"] == 2
        assert scores["accuracy"] == pytest.approx(2 / 3)
        group = scores["groups"]["L1/existence"]
        assert group["indefinite"] == 0
        assert group["mae"] is None and group["mae_n"] == 0

    def test_indefinite_counts_wrong(self):
        records = [record(f"q{i}", Value.boolean(True), "yes_no")
                   for i in range(2)]
        judged = judge_answers(records, {"q0": "yes", "q1": "hard to say"})
        scores = score_vqa(records, judged)
        assert scores["correct"] == 1
        assert scores["groups"]["L1/existence"]["indefinite"] == 1

    def test_mae_over_definite_predictions(self):
        records = [record("q0", Value.integer(2), "integer", "numeric_counting"),
                   record("q1", Value.integer(4), "integer", "numeric_counting"),
                   record("q2", Value.integer(5), "integer", "numeric_counting")]
        judged = judge_answers(records, {"q0": "2", "q1": "three"})
        scores = score_vqa(records, judged)
        group = scores["groups"]["L1/numeric_counting"]
        assert group["correct"] == 1
        assert group["mae"] == pytest.approx(0.5)
        assert group["mae_n"] == 2
        assert group["indefinite"] == 1

    def test_groups_roll_up_into_tiers(self):
        records = [record("q0", Value.boolean(True), "yes_no", "existence", "L1"),
                   record("q1", Value.integer(1), "integer",
                          "numeric_counting", "L1"),
                   record("q2", Value.boolean(False), "yes_no", "existence", "L3")]
        judged = judge_answers(records, {"q0": "yes", "q1": "2", "q2": "no"})
        scores = score_vqa(records, judged)
        assert scores["tiers"]["L1"] == {"n": 2, "correct": 1, "accuracy": 0.5}
        assert scores["tiers"]["L3"]["accuracy"] == 1.0

    def test_unknown_or_empty_inputs_raise(self):
        records = [record("q0", Value.boolean(True), "yes_no")]
        with pytest.raises(ValueError):
            score_vqa([], judge_answers(records, {}))
        with pytest.raises(ValueError):
            score_vqa(records, [])
        with pytest.raises(ValueError):
            score_vqa(records, [JudgedAnswer("ghost", Value.boolean(True))])


def caption(*objects):
    return SceneCaption(scene_id="t", objects=tuple(objects))


def claim(cycles=(), **attrs):
    return CaptionObject(attributes=attrs, cycles=tuple(cycles))


class TestCaptionMatching:
    def test_silence_on_attributes_still_matches(self):
        gt = caption(claim(shape="cone", color="red"),
                     claim(shape="sphere", color="blue"))
        pred = caption(claim(color="blue"))
        assert match_objects(pred, gt) == [(0, 1)]

    def test_ambiguous_claim_takes_earliest_ground_truth(self):
        gt = caption(claim(shape="cone", color="red"),
                     claim(shape="sphere", color="red"))
        pred = caption(claim(color="red"))
        assert match_objects(pred, gt) == [(0, 0)]

    def test_augmenting_path_reassigns_greedy_picks(self):
        # pred0 fits either slot, pred1 only the first: matching must flex
        gt = caption(claim(shape="cube", color="red"),
                     claim(shape="cube", color="blue"))
        pred = caption(claim(shape="cube"), claim(color="red"))
        assert match_objects(pred, gt) == [(0, 1), (1, 0)]

    def test_wrong_or_unknown_attributes_block_the_match(self):
        gt = caption(claim(shape="cone", color="red"))
        assert match_objects(caption(claim(shape="cone", color="blue")), gt) == []
        assert match_objects(caption(claim(texture="smooth")), gt) == []


class TestScoreCaptioning:
    def test_identity_caption_is_perfect(self):
        obj = make_object("a", shape="cube", color0="yellow",
                          cycles=(cyc(SizeChange(target="large"), 1),))
        gt = caption_from_scene(make_graph(obj))
        scores = score_captioning(gt, gt)
        assert scores["objects"]["f1"] == 1.0
        assert scores["cycles"]["f1"] == 1.0
        assert scores["scene_id"] == "t"

    def test_cycle_precision_recall_fixture(self):
        gt = caption(
            claim(shape="cube", cycles=("orbit", "size_change")),
            claim(shape="sphere", cycles=("color_change",)),
            claim(shape="cone"))
        pred = caption(
            claim(shape="cube", cycles=("orbit",)),
            claim(shape="sphere", cycles=("color_change", "orientation_change")),
            claim(shape="cone"),
            claim(shape="cylinder", cycles=("linear_motion",)))
        scores = score_captioning(pred, gt)
        assert scores["objects"]["tp"] == 3
        assert scores["objects"]["fp"] == 1
        assert scores["objects"]["fn"] == 0
        cyc_scores = scores["cycles"]
        assert (cyc_scores["tp"], cyc_scores["fp"], cyc_scores["fn"]) == (2, 2, 1)
        assert cyc_scores["precision"] == pytest.approx(0.5)
        assert cyc_scores["recall"] == pytest.approx(2 / 3)

    def test_prediction_order_does_not_change_totals(self):
        gt = caption(claim(shape="cube", cycles=("orbit",)),
                     claim(shape="sphere"),
                     claim(shape="cone", cycles=("color_change",)))
        objs = [claim(shape="cone", cycles=("color_change",)),
                claim(shape="cube", cycles=("orbit",)),
                claim(shape="sphere")]
        forward = score_captioning(SceneCaption("t", tuple(objs)), gt)
        backward = score_captioning(SceneCaption("t", tuple(reversed(objs))), gt)
        assert forward["objects"] == backward["objects"]
        assert forward["cycles"] == backward["cycles"]

    def test_missed_object_costs_its_cycles(self):
        gt = caption(claim(shape="cube", cycles=("orbit", "linear_motion")))
        scores = score_captioning(caption(), gt)
        assert scores["objects"]["fn"] == 1
        assert scores["cycles"]["fn"] == 2
        assert scores["cycles"]["f1"] == 0.0


class TestCaptionFromScene:
    def test_reads_frame_zero_attributes_and_sorted_cycles(self):
        hub = make_object("hub", shape="cube", color0="purple",
                          position0=Vec3(0.0, 0.0, 0.0))
        rider = make_object(
            "rider", material="metal", position0=Vec3(2.0, 0.0, 0.0),
            cycles=(cyc(Orbit(center_id="hub", radius=2.0, initial_angle=0.0,
                              direction="clockwise"), 1),
                    cyc(ColorChange(target="green"), 2)))
        gt = caption_from_scene(make_graph(hub, rider))
        assert gt.objects[0].attributes == {
            "shape": "cube", "color": "purple", "size": "small",
            "material": "rubber"}
        assert gt.objects[1].cycles == ("color_change", "orbit")
        assert gt.objects[0].cycles == ()
