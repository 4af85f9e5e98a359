"""Acceptance gate: one visible PASS/FAIL line per shipped guarantee.

Each test prints its verdict straight to the terminal (bypassing capture)
so a test log always shows the eight summary lines, then asserts.
"""

from __future__ import annotations

import filecmp
import os
import time

import numpy as np

from cyclebench.builder import TIERS
from cyclebench.engine import eval_light, object_state_at
from cyclebench.model import (
    COLOR_NAMES,
    ColorChange,
    CycleSpec,
    LinearMotion,
    Orbit,
    OrientationChange,
    SizeChange,
    Value,
    Vec3,
    circular_hue_distance,
)
from cyclebench.pipeline import build_dataset, composition_for, verify_dataset
from cyclebench.questions import balance_yes_no, brute_force_answer, execute, generate_for_scene
from cyclebench.scoring import judge_answers, match_objects, score_captioning, score_vqa
from tests.conftest import DESK_SCENES_PER_TIER, DESK_SEED
from tests.test_model import make_graph, make_object
from tests.test_scoring import caption, claim, record

FRAME_COUNT = 160
FPS = 32
PASS_CHOICES = (1, 2, 5)

CHROMATIC = tuple(c for c in COLOR_NAMES if c != "gray")


def verdict(capsys, name, ok, detail=""):
    with capsys.disabled():
        suffix = f"  ({detail})" if detail and not ok else ""
        print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}{suffix}")
    assert ok, detail


def spec(variant, passes):
    return CycleSpec(variant, passes * FPS / FRAME_COUNT, passes)


def random_cycle_object(rng, kind):
    passes = int(PASS_CHOICES[rng.integers(3)])
    pos = Vec3(float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)), 0.0)
    if kind == "linear_motion":
        switch = Vec3(float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)), 0.0)
        obj = make_object("x", position0=pos,
                          cycles=(spec(LinearMotion(switch), passes),))
        return (obj,), "x"
    if kind == "orbit":
        center = make_object("c", position0=pos)
        radius = float(rng.uniform(1.5, 3.0))
        angle = float(rng.uniform(0.0, 360.0))
        direction = "clockwise" if rng.integers(2) else "counterclockwise"
        start = Vec3(pos.x + radius * np.cos(np.radians(angle)),
                     pos.y + radius * np.sin(np.radians(angle)), 0.0)
        obj = make_object("x", position0=start,
                          cycles=(spec(Orbit(center_id="c", radius=radius,
                                             initial_angle=angle,
                                             direction=direction), passes),))
        return (center, obj), "x"
    if kind == "size_change":
        size0, target = ("small", "large") if rng.integers(2) else ("large", "small")
        obj = make_object("x", size0=size0, position0=pos,
                          cycles=(spec(SizeChange(target=target), passes),))
        return (obj,), "x"
    if kind == "color_change":
        color0 = CHROMATIC[rng.integers(len(CHROMATIC))]
        target = color0
        while target == color0:
            target = CHROMATIC[rng.integers(len(CHROMATIC))]
        obj = make_object("x", color0=color0, position0=pos,
                          cycles=(spec(ColorChange(target=target), passes),))
        return (obj,), "x"
    shape = "cube" if rng.integers(2) else "cone"
    obj = make_object("x", shape=shape, position0=pos,
                      orientation0=float(rng.uniform(0.0, 360.0)),
                      cycles=(spec(OrientationChange(turns=1), passes),))
    return (obj,), "x"


def states_match(a, b, tol=1e-9):
    return (abs(a.position.x - b.position.x) <= tol
            and abs(a.position.y - b.position.y) <= tol
            and abs(a.position.z - b.position.z) <= tol
            and abs(a.scale - b.scale) <= tol
            and circular_hue_distance(a.color_hue, b.color_hue) <= tol
            and circular_hue_distance(a.orientation % 360.0,
                                      b.orientation % 360.0) <= tol)


class TestAcceptance:
    def test_periodicity(self, capsys):
        rng = np.random.default_rng(20260819)
        kinds = ("linear_motion", "orbit", "size_change", "color_change",
                 "orientation_change")
        started = time.monotonic()
        failures = []
        for n in range(500):
            kind = kinds[n % len(kinds)]
            objects, target = random_cycle_object(rng, kind)
            graph = make_graph(*objects)
            passes = graph.object(target).cycles[0].passes
            lap = FRAME_COUNT / (passes * FPS)
            base = object_state_at(graph, target, 0.0)
            for lap_index in (0, 1, 2, 3):
                state = object_state_at(graph, target, lap_index * lap)
                if not states_match(base, state):
                    failures.append((n, kind, lap_index))
        for lap_index in (0, 1, 2, 3):
            value = eval_light(800.0, 0.2, FRAME_COUNT, lap_index * FRAME_COUNT)
            if abs(value - 800.0) > 1e-9:
                failures.append(("light", lap_index))
        elapsed = time.monotonic() - started
        ok = not failures and elapsed < 10.0
        verdict(capsys, "periodicity", ok,
                f"{len(failures)} spec failures, {elapsed:.2f}s")

    def test_oracle_equivalence(self, capsys, desk, desk_temporals):
        started = time.monotonic()
        mismatches = 0
        for rec in desk.records:
            temporal = desk_temporals[rec.scene_id]
            fast = execute(rec.program, temporal)
            slow = brute_force_answer(rec, temporal)
            if fast.to_json() != slow.to_json():
                mismatches += 1
        elapsed = time.monotonic() - started
        ok = mismatches == 0 and elapsed < 300.0
        verdict(capsys, "oracle-equivalence", ok,
                f"{mismatches}/{len(desk.records)} mismatched, {elapsed:.1f}s")

    def test_tier_composition(self, capsys, desk_graphs):
        violations = []
        for scene_id, graph in desk_graphs.items():
            effective = graph.tier
            if graph.tier == "L5":
                index = int(scene_id.rsplit("_", 1)[1])
                effective = composition_for("L5", index)
            contract = TIERS[effective]
            cyclic = sum(1 for o in graph.objects if o.cycles)
            clutter = sum(1 for o in graph.objects if not o.cycles)
            lo, hi = contract.clutter_range
            if cyclic != contract.n_cyclic or not lo <= clutter <= hi:
                violations.append((scene_id, cyclic, clutter))
        ok = not violations
        verdict(capsys, "tier-composition", ok, f"violations: {violations[:4]}")

    def test_answer_domains(self, capsys, desk):
        violations = []
        for rec in desk.records:
            value = rec.answer.data
            if rec.template_id == "numeric_occurrence" and value not in {1, 2, 5}:
                violations.append((rec.question_id, value))
            elif rec.template_id == "numeric_periodicity" and value not in {160, 80, 32}:
                violations.append((rec.question_id, value))
            elif rec.template_id == "numeric_counting" and value not in {0, 1, 2, 3}:
                violations.append((rec.question_id, value))
        ok = not violations
        verdict(capsys, "answer-domains", ok, f"violations: {violations[:4]}")

    def test_yes_no_balance(self, capsys, desk_temporals):
        records = []
        aim_state: dict = {}
        for index, scene_id in enumerate(sorted(desk_temporals)):
            rng = np.random.default_rng((DESK_SEED, 5, index))
            records.extend(generate_for_scene(desk_temporals[scene_id], rng,
                                              rounds=13, aim_state=aim_state))
        records = balance_yes_no(records, np.random.default_rng((DESK_SEED, 6)))
        groups: dict[tuple[str, str], list[int]] = {}
        for rec in records:
            if rec.answer_kind != "yes_no":
                continue
            tally = groups.setdefault((rec.tier, rec.template_id), [0, 0])
            tally[0 if rec.answer.data else 1] += 1
        big = {k: (y, n) for k, (y, n) in groups.items() if y + n >= 200}
        off = {k: y / (y + n) for k, (y, n) in big.items()
               if abs(y / (y + n) - 0.5) > 0.05}
        ok = bool(big) and not off
        verdict(capsys, "yes-no-balance", ok,
                f"{len(big)} groups at 200+, off-balance: {off}")

    def test_determinism(self, capsys, desk, tmp_path):
        rebuilt = build_dataset(str(tmp_path / "again"), DESK_SEED,
                                scenes_per_tier=DESK_SCENES_PER_TIER,
                                proportional=False)
        differing = []
        for rel in ["manifest.json", "questions.jsonl"] + sorted(
                os.path.join("scenes", name)
                for name in os.listdir(os.path.join(desk.out_dir, "scenes"))):
            a = os.path.join(desk.out_dir, rel)
            b = os.path.join(rebuilt.out_dir, rel)
            if not filecmp.cmp(a, b, shallow=False):
                differing.append(rel)
        ok = not differing
        verdict(capsys, "determinism", ok, f"differing files: {differing[:4]}")

    def test_scorer_fixtures(self, capsys):
        problems = []

        records = [record(f"q{i}", Value.boolean(True), "yes_no")
                   for i in range(3)]
        judged = judge_answers(records, {"q0": "yes", "q1": "yes", "q2": "dunno"})
        scores = score_vqa(records, judged)
        group = scores["groups"]["L1/existence"]
        if not (scores["accuracy"] == 2 / 3 and group["indefinite"] == 1):
            problems.append(f"accuracy fixture: {scores['accuracy']}, "
                            f"indefinite {group['indefinite']}")

        int_records = [record("q0", Value.integer(2), "integer", "numeric_counting"),
                       record("q1", Value.integer(4), "integer", "numeric_counting"),
                       record("q2", Value.integer(5), "integer", "numeric_counting")]
        judged = judge_answers(int_records, {"q0": "2", "q1": "3", "q2": "unsure"})
        group = score_vqa(int_records, judged)["groups"]["L1/numeric_counting"]
        if not (group["mae"] == 0.5 and group["mae_n"] == 2):
            problems.append(f"mae fixture: {group['mae']} over {group['mae_n']}")

        gt = caption(
            claim(shape="cone", color="red", size="small", material="rubber"),
            claim(shape="sphere", color="blue", size="large", material="metal"))
        pairs = match_objects(caption(claim(color="red")), gt)
        if pairs != [(0, 0)]:
            problems.append(f"referring fixture matched {pairs}")

        gt = caption(claim(shape="cube", cycles=("orbit", "size_change")),
                     claim(shape="sphere", cycles=("color_change",)),
                     claim(shape="cone"))
        pred = caption(
            claim(shape="cube", cycles=("orbit",)),
            claim(shape="sphere", cycles=("color_change", "orientation_change")),
            claim(shape="cone"),
            claim(shape="cylinder", cycles=("linear_motion",)))
        cycles = score_captioning(pred, gt)["cycles"]
        if (cycles["tp"], cycles["fp"], cycles["fn"]) != (2, 2, 1):
            problems.append(f"cycle fixture: {cycles}")
        if not (cycles["precision"] == 0.5 and cycles["recall"] == 2 / 3):
            problems.append(f"cycle p/r: {cycles}")

        ok = not problems
        verdict(capsys, "scorer-fixtures", ok, "; ".join(problems))

    def test_margin_reverification(self, capsys, desk):
        report = verify_dataset(desk.out_dir)
        margin_problems = [p for p in report.problems if "margin" in p]
        ok = (not margin_problems
              and report.scenes_checked == 5 * DESK_SCENES_PER_TIER)
        verdict(capsys, "margin-reverification", ok,
                f"{len(margin_problems)} margin problems over "
                f"{report.scenes_checked} scenes")
