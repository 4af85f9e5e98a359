"""JSON codecs and atomic file writes.

Scene JSON field names and enum spellings are load-bearing: downstream
consumers (the render bridge, the verifier) parse them, and the determinism
guarantee is byte-level, so encoding is canonical (sorted keys, fixed
indentation, trailing newline).
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Mapping

import numpy as np

from .engine import TemporalScene
from .model import (
    Bounds,
    CameraConfig,
    ColorChange,
    CycleSpec,
    FunctionalProgram,
    LightConfig,
    LinearMotion,
    Modulation,
    ObjectSpec,
    Orbit,
    OrientationChange,
    QARecord,
    SceneGraph,
    SizeChange,
    Value,
    Vec3,
)
from .relations import RELATIONS, RelationTrack


def dumps_canonical(data: object) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file + rename so readers never see a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cycle_to_dict(cycle: CycleSpec, frame_count: int) -> dict:
    variant = cycle.variant
    if isinstance(variant, LinearMotion):
        params: dict = {"switch_point": variant.switch_point.to_json()}
    elif isinstance(variant, Orbit):
        params = {"center_id": variant.center_id, "radius": variant.radius,
                  "initial_angle": variant.initial_angle, "direction": variant.direction}
    elif isinstance(variant, SizeChange):
        params = {"target": variant.target}
    elif isinstance(variant, ColorChange):
        params = {"target": variant.target}
    elif isinstance(variant, OrientationChange):
        params = {"turns": variant.turns}
    else:
        raise TypeError(f"unknown cycle variant {variant!r}")
    return {"type": variant.kind, "params": params, "passes": cycle.passes,
            "period_frames": cycle.period_frames(frame_count)}


def _cycle_from_dict(data: Mapping, frame_count: int, fps: int) -> CycleSpec:
    kind = data["type"]
    params = data["params"]
    if kind == "linear_motion":
        variant: object = LinearMotion(Vec3.from_json(params["switch_point"]))
    elif kind == "orbit":
        variant = Orbit(params["center_id"], float(params["radius"]),
                        float(params["initial_angle"]), params["direction"])
    elif kind == "size_change":
        variant = SizeChange(params["target"])
    elif kind == "color_change":
        variant = ColorChange(params["target"])
    elif kind == "orientation_change":
        variant = OrientationChange(int(params["turns"]))
    else:
        raise ValueError(f"unknown cycle type {kind!r}")
    passes = int(data["passes"])
    return CycleSpec(variant=variant, frequency_hz=passes * fps / frame_count,
                     passes=passes)


def _object_to_dict(obj: ObjectSpec, frame_count: int) -> dict:
    return {
        "id": obj.id,
        "shape": obj.shape,
        "material": obj.material,
        "size0": obj.size0,
        "color0": obj.color0,
        "position0": obj.position0.to_json(),
        "orientation0": obj.orientation0,
        "mesh_ref": obj.mesh_ref,
        "cycles": [_cycle_to_dict(c, frame_count) for c in obj.cycles],
    }


def _object_from_dict(data: Mapping, frame_count: int, fps: int) -> ObjectSpec:
    return ObjectSpec(
        id=data["id"],
        shape=data["shape"],
        material=data["material"],
        size0=data["size0"],
        color0=data["color0"],
        position0=Vec3.from_json(data["position0"]),
        orientation0=float(data["orientation0"]),
        cycles=tuple(_cycle_from_dict(c, frame_count, fps) for c in data["cycles"]),
        mesh_ref=data.get("mesh_ref", ""),
    )


def _light_to_dict(light: LightConfig) -> dict:
    modulation = None
    if light.modulation is not None:
        modulation = {"floor": light.modulation.floor,
                      "period_frames": light.modulation.period_frames}
    return {"name": light.name, "position": light.position.to_json(),
            "intensity": light.intensity, "modulation": modulation}


def _light_from_dict(data: Mapping) -> LightConfig:
    modulation = None
    if data.get("modulation") is not None:
        modulation = Modulation(float(data["modulation"]["floor"]),
                                int(data["modulation"]["period_frames"]))
    return LightConfig(name=data["name"], position=Vec3.from_json(data["position"]),
                       intensity=float(data["intensity"]), modulation=modulation)


def encode_frame_bits(frames: np.ndarray) -> str:
    """Pack a boolean frame mask into hex, frame 0 at the first byte's MSB."""
    return np.packbits(frames.astype(np.uint8)).tobytes().hex()


def decode_frame_bits(hexed: str, frame_count: int) -> np.ndarray:
    raw = np.frombuffer(bytes.fromhex(hexed), dtype=np.uint8)
    return np.unpackbits(raw)[:frame_count].astype(bool)


def _relations_to_dict(tracks: list[RelationTrack]) -> dict:
    block: dict = {rel: [] for rel in RELATIONS}
    for track in tracks:
        block[track.relation].append({
            "subject": track.subject_id,
            "object": track.object_id,
            "ever": track.ever,
            "always": track.always,
            "frames_hex": encode_frame_bits(track.frames),
        })
    return block


def _tracks_to_dict(temporal: TemporalScene) -> dict:
    block = {}
    for i, obj in enumerate(temporal.graph.objects):
        positions = [[float(x), float(y), float(s)] for (x, y), s in
                     zip(temporal.positions[i], temporal.scales[i])]
        block[obj.id] = {
            "position": positions,
            "scale": [float(v) for v in temporal.scales[i]],
            "orientation": [float(v) for v in temporal.orientations[i]],
            "hue": [float(v) for v in temporal.hues[i]],
            "nominal_size": [temporal.nominal_size(i, f)
                             for f in range(temporal.frame_count)],
            "nominal_color": [temporal.nominal_color(i, f)
                              for f in range(temporal.frame_count)],
        }
    return block


def scene_to_dict(graph: SceneGraph, *, relation_tracks: list[RelationTrack] | None = None,
                  temporal: TemporalScene | None = None) -> dict:
    data = {
        "scene_id": graph.scene_id,
        "tier": graph.tier,
        "seed": graph.seed,
        "frame_count": graph.frame_count,
        "fps": graph.fps,
        "bounds": {"x": list(graph.bounds.x), "y": list(graph.bounds.y)},
        "camera": {
            "eye": graph.camera.eye.to_json(),
            "look_at": graph.camera.look_at.to_json(),
            "right": list(graph.camera.right),
            "forward": list(graph.camera.forward),
        },
        "lights": [_light_to_dict(light) for light in graph.lights],
        "objects": [_object_to_dict(obj, graph.frame_count) for obj in graph.objects],
    }
    if relation_tracks is not None:
        data["relations"] = _relations_to_dict(relation_tracks)
    if temporal is not None:
        data["tracks"] = _tracks_to_dict(temporal)
    return data


def scene_from_dict(data: Mapping) -> SceneGraph:
    frame_count = int(data["frame_count"])
    fps = int(data["fps"])
    return SceneGraph(
        scene_id=data["scene_id"],
        tier=data["tier"],
        seed=int(data["seed"]),
        frame_count=frame_count,
        fps=fps,
        bounds=Bounds(x=tuple(data["bounds"]["x"]), y=tuple(data["bounds"]["y"])),
        camera=CameraConfig(eye=Vec3.from_json(data["camera"]["eye"]),
                            look_at=Vec3.from_json(data["camera"]["look_at"])),
        lights=tuple(_light_from_dict(light) for light in data["lights"]),
        objects=tuple(_object_from_dict(obj, frame_count, fps)
                      for obj in data["objects"]),
    )


def value_to_json(value: Value) -> object:
    return value.to_json()


def value_from_json(data: object, answer_kind: str) -> Value:
    if answer_kind == "yes_no":
        return Value.boolean(bool(data))
    if answer_kind == "integer":
        return Value.integer(int(data))
    if answer_kind == "attribute":
        return Value.attr(str(data))
    raise ValueError(f"unknown answer kind {answer_kind!r}")


def question_to_dict(record: QARecord) -> dict:
    return {
        "question_id": record.question_id,
        "scene_id": record.scene_id,
        "tier": record.tier,
        "template_id": record.template_id,
        "quantifier": record.quantifier,
        "question": record.question,
        "answer": value_to_json(record.answer),
        "answer_kind": record.answer_kind,
        "program": record.program.to_json(),
    }


def question_from_dict(data: Mapping) -> QARecord:
    return QARecord(
        question_id=data["question_id"],
        scene_id=data["scene_id"],
        tier=data["tier"],
        template_id=data["template_id"],
        quantifier=data["quantifier"],
        question=data["question"],
        answer=value_from_json(data["answer"], data["answer_kind"]),
        answer_kind=data["answer_kind"],
        program=FunctionalProgram.from_json(data["program"]),
    )


def questions_to_jsonl(records: list[QARecord]) -> str:
    lines = [json.dumps(question_to_dict(r), sort_keys=True) for r in records]
    return "\n".join(lines) + ("\n" if lines else "")


def questions_from_jsonl(text: str) -> list[QARecord]:
    records = []
    for line in text.splitlines():
        line = line.strip()
        if line:
            records.append(question_from_dict(json.loads(line)))
    return records
