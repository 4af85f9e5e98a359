"""Deterministic scoring of model outputs against stored ground truth.

Two tasks share this module: question answering (exact match after a
normalization pass, with mean absolute error on integer questions) and
caption grading (bipartite object matching on stated attributes, then
set-level precision/recall over claimed cycle kinds).
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    COLOR_NAMES,
    CaptionObject,
    JudgedAnswer,
    MATERIALS,
    QARecord,
    SceneCaption,
    SceneGraph,
    SHAPES,
    SIZES,
    Value,
)

_WORD_NUMBERS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
}

_SYNONYMS = {
    "counter-clockwise": "counterclockwise",
    "anti-clockwise": "counterclockwise",
    "anticlockwise": "counterclockwise",
    "grey": "gray",
    "shiny": "metal",
    "metallic": "metal",
    "matte": "rubber",
    "ball": "sphere",
    "block": "cube",
}

_TRUE_WORDS = frozenset({"yes", "true", "y"})
_FALSE_WORDS = frozenset({"no", "false", "n"})


def normalize_value(raw: object, answer_kind: str) -> bool | int | str | None:
    """Map a raw model answer onto the answer domain; None means Indefinite."""
    if raw is None:
        return None
    if isinstance(raw, bool):
        return raw if answer_kind == "yes_no" else None
    if isinstance(raw, int):
        return raw if answer_kind == "integer" else None
    if not isinstance(raw, str):
        return None
    text = raw.strip().lower().rstrip(".").strip()
    if not text:
        return None
    text = _SYNONYMS.get(text, text)
    if answer_kind == "yes_no":
        if text in _TRUE_WORDS:
            return True
        if text in _FALSE_WORDS:
            return False
        return None
    if answer_kind == "integer":
        if text in _WORD_NUMBERS:
            return _WORD_NUMBERS[text]
        try:
            return int(text)
        except ValueError:
            return None
    return text


def _to_judged(question_id: str, raw: object, answer_kind: str) -> JudgedAnswer:
    normalized = normalize_value(raw, answer_kind)
    if normalized is None:
        return JudgedAnswer(question_id, None)
    if answer_kind == "yes_no":
        return JudgedAnswer(question_id, Value.boolean(bool(normalized)))
    if answer_kind == "integer":
        return JudgedAnswer(question_id, Value.integer(int(normalized)))
    return JudgedAnswer(question_id, Value.attr(str(normalized)))


def judge_answers(records: list[QARecord],
                  raw_answers: dict[str, object]) -> list[JudgedAnswer]:
    """Normalize one raw answer per record; missing ids become Indefinite."""
    return [_to_judged(r.question_id, raw_answers.get(r.question_id), r.answer_kind)
            for r in records]


@dataclass(frozen=True)
class GroupScore:
    n: int
    correct: int
    indefinite: int
    mae: float | None
    mae_n: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.n if self.n else 0.0


def score_vqa(records: list[QARecord], judged: list[JudgedAnswer]) -> dict:
    """Exact-match accuracy per tier and template; Indefinite counts wrong.

    Integer templates additionally report mean absolute error over the
    definite predictions only; a group with no definite prediction reports
    mae null rather than a fake zero.
    """
    if not records:
        raise ValueError("no records to score")
    if not judged:
        raise ValueError("no judged answers to score")
    by_id = {r.question_id: r for r in records}
    answered: dict[str, JudgedAnswer] = {}
    for j in judged:
        if j.question_id not in by_id:
            raise ValueError(f"judged answer for unknown question {j.question_id!r}")
        answered[j.question_id] = j

    groups: dict[tuple[str, str], list[tuple[QARecord, JudgedAnswer | None]]] = {}
    for record in records:
        key = (record.tier, record.template_id)
        groups.setdefault(key, []).append((record, answered.get(record.question_id)))

    out_groups: dict[str, dict] = {}
    total = 0
    total_correct = 0
    for (tier, template_id), pairs in sorted(groups.items()):
        n = len(pairs)
        correct = 0
        indefinite = 0
        abs_errors: list[int] = []
        for record, j in pairs:
            if j is None or j.is_indefinite:
                indefinite += 1
                continue
            if record.answer_kind == "integer":
                abs_errors.append(abs(int(j.value.data) - int(record.answer.data)))
            if j.value.to_json() == record.answer.to_json():
                correct += 1
        mae = sum(abs_errors) / len(abs_errors) if abs_errors else None
        out_groups[f"{tier}/{template_id}"] = {
            "n": n,
            "correct": correct,
            "accuracy": correct / n,
            "indefinite": indefinite,
            "mae": mae,
            "mae_n": len(abs_errors),
        }
        total += n
        total_correct += correct

    per_tier: dict[str, dict] = {}
    for key, row in out_groups.items():
        tier = key.split("/", 1)[0]
        agg = per_tier.setdefault(tier, {"n": 0, "correct": 0})
        agg["n"] += row["n"]
        agg["correct"] += row["correct"]
    for agg in per_tier.values():
        agg["accuracy"] = agg["correct"] / agg["n"]

    return {
        "n": total,
        "correct": total_correct,
        "accuracy": total_correct / total,
        "tiers": per_tier,
        "groups": out_groups,
    }


_ATTRIBUTE_DOMAINS = {
    "shape": frozenset(SHAPES),
    "color": frozenset(COLOR_NAMES),
    "size": frozenset(SIZES),
    "material": frozenset(MATERIALS),
}


def _caption_matches(pred_attrs, gt_attrs) -> bool:
    # a prediction matches when every attribute it states is right; staying
    # silent on an attribute is not a mismatch
    for key, value in sorted(pred_attrs.items()):
        if key not in _ATTRIBUTE_DOMAINS:
            return False
        if gt_attrs.get(key) != value:
            return False
    return True


def match_objects(pred: SceneCaption, gt: SceneCaption) -> list[tuple[int, int]]:
    """Maximum bipartite matching of caption objects onto ground truth.

    Augmenting-path search in index order keeps the matching deterministic:
    ties resolve toward the earliest ground-truth object.
    """
    edges: list[list[int]] = []
    for p in pred.objects:
        edges.append([j for j, g in enumerate(gt.objects)
                      if _caption_matches(p.attributes, g.attributes)])

    owner: dict[int, int] = {}

    def try_assign(i: int, seen: set[int]) -> bool:
        for j in edges[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in owner or try_assign(owner[j], seen):
                owner[j] = i
                return True
        return False

    for i in range(len(pred.objects)):
        try_assign(i, set())
    return sorted((i, j) for j, i in owner.items())


def _f1(tp: int, fp: int, fn: int) -> dict:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return {"tp": tp, "fp": fp, "fn": fn,
            "precision": precision, "recall": recall, "f1": f1}


def score_captioning(pred: SceneCaption, gt: SceneCaption) -> dict:
    """Object-level and cycle-level precision/recall/F1 for one caption."""
    pairs = match_objects(pred, gt)
    matched_pred = {i for i, _ in pairs}
    matched_gt = {j for _, j in pairs}

    object_scores = _f1(tp=len(pairs),
                        fp=len(pred.objects) - len(pairs),
                        fn=len(gt.objects) - len(pairs))

    tp = fp = fn = 0
    for i, j in pairs:
        pred_cycles = sorted(pred.objects[i].cycles)
        gt_cycles = list(gt.objects[j].cycles)
        for kind in pred_cycles:
            if kind in gt_cycles:
                gt_cycles.remove(kind)
                tp += 1
            else:
                fp += 1
        fn += len(gt_cycles)
    for i, p in enumerate(pred.objects):
        if i not in matched_pred:
            fp += len(p.cycles)
    for j, g in enumerate(gt.objects):
        if j not in matched_gt:
            fn += len(g.cycles)

    return {
        "scene_id": gt.scene_id,
        "objects": object_scores,
        "cycles": _f1(tp, fp, fn),
    }


def caption_from_scene(graph: SceneGraph) -> SceneCaption:
    """Ground-truth caption: frame-0 attributes plus cycle kinds per object."""
    objects = []
    for obj in graph.objects:
        objects.append(CaptionObject(
            attributes={"shape": obj.shape, "color": obj.color0,
                        "size": obj.size0, "material": obj.material},
            cycles=tuple(sorted(c.kind for c in obj.cycles)),
        ))
    return SceneCaption(scene_id=graph.scene_id, objects=tuple(objects))
