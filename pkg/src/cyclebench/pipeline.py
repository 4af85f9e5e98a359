"""Dataset assembly, verification, and keyframe export.

Ties the scene builder, question engine, and serializers together into an
on-disk dataset layout::

    out/
      manifest.json          build parameters, per-scene index, tallies
      scenes/<scene_id>.json one scene graph per file
      questions.jsonl        one question record per line, all tiers

Verification re-derives everything from the stored artifacts through the
slow scalar paths (graph recursion, pure-Python margin scan, the standalone
program oracle) so a bug shared with the fast kernels cannot hide itself.
"""

from __future__ import annotations

import colorsys
import json
import logging
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .builder import TIERS, BuildConfig, GenerationFailed, build_scene
from .engine import eval_light, materialize, object_state_at
from .model import COLOR_INDEX, PALETTE, QARecord, SceneGraph, validate_graph
from .questions import balance_yes_no, generate_for_scene, validate
from .questions.oracle import run_program
from .questions.templates import TEMPLATES
from .serialize import (
    atomic_write_text,
    dumps_canonical,
    questions_from_jsonl,
    questions_to_jsonl,
    scene_from_dict,
    scene_to_dict,
)

log = logging.getLogger(__name__)

# full-size per-tier scene counts; smaller datasets scale these proportionally
TIER_WEIGHTS = {"L1": 3000, "L2": 3000, "L3": 3000, "L4": 3080, "L5": 2720}
SPLIT_NAMES = ("train", "val", "test")
SPLIT_WEIGHTS = (2, 1, 1)
# ties in the largest-remainder rounding resolve train first, then test
SPLIT_PRIORITY = ("train", "test", "val")

_QUESTION_STREAM = 5
_BALANCE_STREAM = 6


def largest_remainder(weights: tuple[float, ...], total: int,
                      priority: tuple[int, ...] | None = None) -> list[int]:
    """Integer allocation of `total` proportional to weights, exact sum."""
    scale = sum(weights)
    quotas = [w * total / scale for w in weights]
    counts = [math.floor(q) for q in quotas]
    leftover = total - sum(counts)
    order = sorted(range(len(weights)),
                   key=lambda i: (-(quotas[i] - counts[i]),
                                  priority.index(i) if priority else i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


def _tier_counts(tiers: tuple[str, ...], scenes_per_tier: int | None,
                 total_scenes: int | None, proportional: bool) -> dict[str, int]:
    if scenes_per_tier is not None:
        return {tier: scenes_per_tier for tier in tiers}
    if total_scenes is None:
        raise ValueError("need scenes_per_tier or total_scenes")
    if not proportional:
        counts = largest_remainder(tuple(1.0 for _ in tiers), total_scenes)
        return dict(zip(tiers, counts))
    weights = tuple(float(TIER_WEIGHTS[t]) for t in tiers)
    return dict(zip(tiers, largest_remainder(weights, total_scenes)))


def _split_assignment(n: int) -> list[str]:
    priority = tuple(SPLIT_PRIORITY.index(name) for name in SPLIT_NAMES)
    order = sorted(range(len(SPLIT_NAMES)), key=lambda i: priority[i])
    counts = largest_remainder(tuple(float(w) for w in SPLIT_WEIGHTS), n,
                               priority=order)
    out: list[str] = []
    for name, count in zip(SPLIT_NAMES, counts):
        out.extend([name] * count)
    return out


def _scene_seeds(master_seed: int, tier_index: int, count: int) -> list[int]:
    words = np.random.SeedSequence((master_seed, tier_index)).generate_state(
        count, dtype=np.uint64)
    return [int(w) for w in words]


def composition_for(tier: str, index: int) -> str | None:
    """The light-cycle tier walks the other compositions by scene index."""
    if tier != "L5":
        return None
    return f"L{1 + index % 4}"


@dataclass
class BuildResult:
    out_dir: str
    manifest: dict
    records: list[QARecord] = field(default_factory=list)


def build_dataset(out_dir: str, master_seed: int, *,
                  scenes_per_tier: int | None = None,
                  total_scenes: int | None = None,
                  proportional: bool = True,
                  tiers: tuple[str, ...] = tuple(TIERS),
                  rounds: int = 1,
                  config: BuildConfig = BuildConfig(),
                  dense_tracks: bool = False,
                  balance_tolerance: float = 0.02) -> BuildResult:
    """Generate scenes and questions deterministically under one master seed.

    Failed seeds are skipped, logged in the manifest, and replaced by the
    next candidates from the same seed stream, so scene ids stay dense.
    """
    for tier in tiers:
        if tier not in TIERS:
            raise ValueError(f"unknown tier {tier!r}")
    counts = _tier_counts(tiers, scenes_per_tier, total_scenes, proportional)

    scenes_dir = os.path.join(out_dir, "scenes")
    os.makedirs(scenes_dir, exist_ok=True)

    scene_rows: list[dict] = []
    failed: list[dict] = []
    records: list[QARecord] = []
    aim_state: dict = {}

    for tier in tiers:
        tier_index = list(TIERS).index(tier)
        wanted = counts[tier]
        splits = _split_assignment(wanted)
        reserve = max(16, wanted // 4)
        candidates = _scene_seeds(master_seed, tier_index, wanted + reserve)
        built = 0
        cursor = 0
        while built < wanted:
            if cursor >= len(candidates):
                reserve *= 2
                candidates = _scene_seeds(master_seed, tier_index,
                                          wanted + reserve)
            seed = candidates[cursor]
            cursor += 1
            scene_id = f"{tier}_{built:06d}"
            try:
                graph = build_scene(seed, tier, config, scene_id=scene_id,
                                    composition=composition_for(tier, built))
            except GenerationFailed as exc:
                log.warning("replacing failed seed: %s", exc)
                failed.append({"tier": tier, "seed": seed, "error": str(exc)})
                continue
            temporal = materialize(graph)
            data = scene_to_dict(graph,
                                 temporal=temporal if dense_tracks else None)
            atomic_write_text(os.path.join(scenes_dir, f"{scene_id}.json"),
                              dumps_canonical(data))

            qrng = np.random.Generator(np.random.Philox(np.random.SeedSequence(
                (master_seed, _QUESTION_STREAM, tier_index, built))))
            scene_records = generate_for_scene(temporal, qrng, rounds=rounds,
                                               aim_state=aim_state)
            records.extend(scene_records)
            scene_rows.append({"scene_id": scene_id, "tier": tier,
                               "seed": seed, "split": splits[built],
                               "questions": len(scene_records)})
            built += 1

    brng = np.random.Generator(np.random.Philox(np.random.SeedSequence(
        (master_seed, _BALANCE_STREAM))))
    records = balance_yes_no(records, brng, tolerance=balance_tolerance)

    per_scene: dict[str, int] = {}
    assigned: list[QARecord] = []
    for record in records:
        n = per_scene.get(record.scene_id, 0)
        assigned.append(replace(record, question_id=f"{record.scene_id}_q{n}"))
        per_scene[record.scene_id] = n + 1
    records = assigned
    for row in scene_rows:
        row["questions"] = per_scene.get(row["scene_id"], 0)

    question_counts: dict[str, dict[str, int]] = {}
    yes_no: dict[str, dict[str, list[int]]] = {}
    for record in records:
        bucket = question_counts.setdefault(record.tier, {})
        bucket[record.template_id] = bucket.get(record.template_id, 0) + 1
        if record.answer_kind == "yes_no":
            tally = yes_no.setdefault(record.tier, {}).setdefault(
                record.template_id, [0, 0])
            tally[0 if record.answer.data else 1] += 1

    manifest = {
        "format": "cyclebench-dataset-v1",
        "rng_algorithm": "philox",
        "master_seed": master_seed,
        "frame_count": config.frame_count,
        "fps": config.fps,
        "tiers": {tier: counts[tier] for tier in tiers},
        "split_ratio": list(SPLIT_WEIGHTS),
        "rounds": rounds,
        "dense_tracks": dense_tracks,
        "balance_tolerance": balance_tolerance,
        "scenes": scene_rows,
        "failed_seeds": failed,
        "question_counts": question_counts,
        "yes_no_tallies": {tier: {tid: {"yes": v[0], "no": v[1]}
                                  for tid, v in per.items()}
                           for tier, per in yes_no.items()},
        "questions_file": "questions.jsonl",
    }
    atomic_write_text(os.path.join(out_dir, "questions.jsonl"),
                      questions_to_jsonl(records))
    atomic_write_text(os.path.join(out_dir, "manifest.json"),
                      dumps_canonical(manifest))
    return BuildResult(out_dir=out_dir, manifest=manifest, records=records)


def margin_scan_reference(graph: SceneGraph, object_margin: float,
                          boundary_margin: float) -> tuple[int, int, int] | None:
    """Margin check through the scalar recursion, bypassing the kernels."""
    ids = graph.object_ids()
    bounds = graph.bounds
    for f in range(graph.frame_count):
        t = f / graph.fps
        states = [object_state_at(graph, oid, t) for oid in ids]
        radii = [state.scale * graph.object(oid).bound_factor()
                 for oid, state in zip(ids, states)]
        for i, state in enumerate(states):
            if (state.position.x - radii[i] < bounds.x[0] + boundary_margin
                    or state.position.x + radii[i] > bounds.x[1] - boundary_margin
                    or state.position.y - radii[i] < bounds.y[0] + boundary_margin
                    or state.position.y + radii[i] > bounds.y[1] - boundary_margin):
                return (f, i, -1)
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                dx = states[i].position.x - states[j].position.x
                dy = states[i].position.y - states[j].position.y
                limit = radii[i] + radii[j] + object_margin
                if dx * dx + dy * dy < limit * limit:
                    return (f, i, j)
    return None


@dataclass
class VerifyReport:
    scenes_checked: int = 0
    questions_checked: int = 0
    problems: list[str] = field(default_factory=list)
    balance: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.problems


_PERIOD_DOMAIN = frozenset({32, 80, 160})
_PASS_DOMAIN = frozenset({1, 2, 5})


def _check_answer_domain(record: QARecord, graph: SceneGraph) -> str | None:
    value = record.answer.data
    if record.answer_kind == "yes_no":
        if not isinstance(value, bool):
            return f"{record.question_id}: yes/no answer is not a bool"
    elif record.answer_kind == "integer":
        if not isinstance(value, int):
            return f"{record.question_id}: integer answer is not an int"
        if record.template_id == "numeric_counting":
            if not 0 <= value <= len(graph.objects):
                return f"{record.question_id}: count {value} out of range"
        elif record.template_id == "numeric_periodicity":
            if value not in _PERIOD_DOMAIN:
                return f"{record.question_id}: period {value} not in {sorted(_PERIOD_DOMAIN)}"
        elif record.template_id == "numeric_occurrence":
            if value not in _PASS_DOMAIN:
                return f"{record.question_id}: pass count {value} not in {sorted(_PASS_DOMAIN)}"
    else:
        if not isinstance(value, str):
            return f"{record.question_id}: attribute answer is not a string"
    return None


def verify_dataset(root: str, *, config: BuildConfig = BuildConfig(),
                   balance_gate: float = 0.05,
                   balance_min_count: int = 200) -> VerifyReport:
    """Re-derive every stored artifact through independent slow paths."""
    report = VerifyReport()
    manifest_path = os.path.join(root, "manifest.json")
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except OSError as exc:
        report.problems.append(f"manifest unreadable: {exc}")
        return report

    with open(os.path.join(root, manifest["questions_file"]),
              encoding="utf-8") as fh:
        records = questions_from_jsonl(fh.read())
    by_scene: dict[str, list[QARecord]] = {}
    for record in records:
        by_scene.setdefault(record.scene_id, []).append(record)

    graphs: dict[str, SceneGraph] = {}
    for row in manifest["scenes"]:
        scene_id = row["scene_id"]
        path = os.path.join(root, "scenes", f"{scene_id}.json")
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            report.problems.append(f"{scene_id}: scene file unreadable: {exc}")
            continue
        graph = scene_from_dict(data)
        graphs[scene_id] = graph
        report.scenes_checked += 1

        problems = validate_graph(graph)
        for problem in problems:
            report.problems.append(f"{scene_id}: {problem}")
        if graph.tier != row["tier"] or graph.seed != row["seed"]:
            report.problems.append(f"{scene_id}: manifest row disagrees with scene file")

        index = int(scene_id.rsplit("_", 1)[1])
        rebuilt = build_scene(graph.seed, graph.tier, config, scene_id=scene_id,
                              composition=composition_for(graph.tier, index))
        if dumps_canonical(scene_to_dict(rebuilt)) != dumps_canonical(
                scene_to_dict(graph)):
            report.problems.append(f"{scene_id}: rebuild from seed differs")

        violation = margin_scan_reference(graph, config.object_margin,
                                          config.boundary_margin)
        if violation is not None:
            report.problems.append(f"{scene_id}: margin violation {violation}")

    template_counts: dict[str, dict[str, int]] = {}
    yes_no: dict[tuple[str, str], list[int]] = {}
    for record in records:
        graph = graphs.get(record.scene_id)
        if graph is None:
            report.problems.append(
                f"{record.question_id}: references unknown scene {record.scene_id}")
            continue
        report.questions_checked += 1
        template = TEMPLATES.get(record.template_id)
        if template is None:
            report.problems.append(f"{record.question_id}: unknown template")
            continue
        if record.answer_kind != template.answer_kind:
            report.problems.append(f"{record.question_id}: answer kind mismatch")
        try:
            validate(record.program)
        except ValueError as exc:
            report.problems.append(f"{record.question_id}: program: {exc}")
            continue
        domain_problem = _check_answer_domain(record, graph)
        if domain_problem:
            report.problems.append(domain_problem)
        expected = run_program(record.program, graph)
        if expected.to_json() != record.answer.to_json():
            report.problems.append(
                f"{record.question_id}: oracle answers {expected.to_json()!r}, "
                f"stored {record.answer.to_json()!r}")
        bucket = template_counts.setdefault(record.tier, {})
        bucket[record.template_id] = bucket.get(record.template_id, 0) + 1
        if record.answer_kind == "yes_no":
            tally = yes_no.setdefault((record.tier, record.template_id), [0, 0])
            tally[0 if record.answer.data else 1] += 1

    if template_counts != manifest["question_counts"]:
        report.problems.append("question counts disagree with manifest")

    for (tier, template_id), (yes, no) in sorted(yes_no.items()):
        total = yes + no
        rate = yes / total if total else 0.0
        report.balance[f"{tier}/{template_id}"] = {
            "yes": yes, "no": no, "rate": rate}
        if total >= balance_min_count and abs(rate - 0.5) > balance_gate:
            report.problems.append(
                f"{tier}/{template_id}: yes-rate {rate:.3f} off balance "
                f"({yes}/{total})")
    return report


def _chromatic_rgb(hue: float) -> tuple[float, float, float]:
    return colorsys.hsv_to_rgb((hue % 360.0) / 360.0, 0.75, 0.75)


def _position_frames(graph: SceneGraph, obj_index: int) -> list[int]:
    graph_obj = graph.objects[obj_index]
    F = graph.frame_count
    orbit = graph_obj.cycle_of("orbit")
    if orbit is not None:
        center = graph.object(orbit.variant.center_id)
        # chord error must stay under 1% of the radius; fast or compound
        # orbits need per-frame keys, slow circular ones every other frame
        step = 1 if (orbit.passes == 5 or center.is_moving) else 2
        return list(range(0, F, step)) + [F]
    linear = graph_obj.cycle_of("linear_motion")
    if linear is not None:
        half = linear.period_frames(F) // 2
        return list(range(0, F + 1, half))
    return [0, F]


def export_keyframes(graph: SceneGraph) -> dict:
    """Collapse the dense per-frame evolution into sparse animation tracks.

    Tracks hold [frame, value...] rows; consumers interpolate linearly
    between rows. Piecewise-linear quantities (linear motion, size ramps,
    unwrapped rotation) keyframe exactly at their breakpoints; curved ones
    (orbits, hue sweeps rendered as RGB, cosine light) are sampled densely
    enough that linear interpolation stays visually exact. Frame F rows
    close the loop back onto the frame-0 state.
    """
    temporal = materialize(graph)
    F = graph.frame_count
    objects = []
    for i, obj in enumerate(graph.objects):
        position = [[f, float(temporal.positions[i, f % F, 0]),
                     float(temporal.positions[i, f % F, 1])]
                    for f in _position_frames(graph, i)]

        size_cycle = obj.cycle_of("size_change")
        if size_cycle is not None:
            half = size_cycle.period_frames(F) // 2
            scale_frames = list(range(0, F + 1, half))
        else:
            scale_frames = [0, F]
        scale = [[f, float(temporal.scales[i, f % F])] for f in scale_frames]

        orient_cycle = obj.cycle_of("orientation_change")
        if orient_cycle is not None:
            total_turns = orient_cycle.variant.turns * orient_cycle.passes
            rotation = [[0, obj.orientation0],
                        [F, obj.orientation0 + 360.0 * total_turns]]
        else:
            rotation = [[0, obj.orientation0], [F, obj.orientation0]]

        color_cycle = obj.cycle_of("color_change")
        if color_cycle is not None:
            color_frames = list(range(0, F, 2)) + [F]
            color = [[f, *_chromatic_rgb(float(temporal.hues[i, f % F]))]
                     for f in color_frames]
        else:
            rgb = PALETTE[COLOR_INDEX[obj.color0]].rgb
            color = [[0, *rgb], [F, *rgb]]

        objects.append({
            "id": obj.id,
            "shape": obj.shape,
            "material": obj.material,
            "mesh_ref": obj.mesh_ref,
            "position": position,
            "scale": scale,
            "rotation": rotation,
            "color": color,
        })

    lights = []
    for light in graph.lights:
        entry = {
            "name": light.name,
            "position": light.position.to_json(),
            "intensity": light.intensity,
            "intensity_keyframes": None,
        }
        if light.modulation is not None:
            frames = list(range(0, F, 2)) + [F]
            entry["intensity_keyframes"] = [
                [f, eval_light(light.intensity, light.modulation.floor,
                               light.modulation.period_frames, f % F)]
                for f in frames]
        lights.append(entry)

    return {
        "scene_id": graph.scene_id,
        "frame_count": F,
        "fps": graph.fps,
        "bounds": {"x": list(graph.bounds.x), "y": list(graph.bounds.y)},
        "camera": {"eye": graph.camera.eye.to_json(),
                   "look_at": graph.camera.look_at.to_json()},
        "lights": lights,
        "objects": objects,
    }
