"""Brute-force answer oracle.

Re-derives a question's answer from the scene graph alone with scalar
per-frame arithmetic and explicit loops: no kernel backends, no vectorized
set algebra, temporal quantifiers by scanning every frame, counts by
counting. Shares only the canonical definitional helpers with the engine
path (palette classification, shorter hue arc, the integer phase rule), so
agreement between the two is a real check of both.
"""

from __future__ import annotations

import math

from ..engine import TemporalScene
from ..model import (
    INVALID,
    SIZE_SCALE,
    CYCLE_KINDS,
    COLOR_HUES,
    FunctionalProgram,
    ObjectSpec,
    QARecord,
    SceneGraph,
    Value,
    Vec3,
    hue_arc,
    nearest_palette_color,
)
from ..relations import relation_at

_SCALE_TOL = 1e-9


class _Oracle:
    def __init__(self, graph: SceneGraph):
        self.graph = graph
        self.F = graph.frame_count
        self.ids = list(graph.object_ids())
        self._pos_cache: dict[tuple[str, int], tuple[float, float]] = {}

    def spec(self, oid: str) -> ObjectSpec:
        return self.graph.object(oid)

    def tri(self, frame: int, passes: int) -> float:
        r = (frame * passes) % self.F
        if 2 * r <= self.F:
            return (2.0 * r) / self.F
        return (2.0 * (self.F - r)) / self.F

    def position(self, oid: str, frame: int) -> tuple[float, float]:
        key = (oid, frame)
        cached = self._pos_cache.get(key)
        if cached is not None:
            return cached
        spec = self.spec(oid)
        orbit = spec.cycle_of("orbit")
        if orbit is not None:
            cx, cy = self.position(orbit.variant.center_id, frame)
            r = (frame * orbit.passes) % self.F
            sign = 1.0 if orbit.variant.direction == "counterclockwise" else -1.0
            ang = (orbit.variant.initial_angle + sign * 360.0 * (r / self.F)) * math.pi / 180.0
            xy = (cx + orbit.variant.radius * math.cos(ang),
                  cy + orbit.variant.radius * math.sin(ang))
        else:
            linear = spec.cycle_of("linear_motion")
            if linear is not None:
                tri = self.tri(frame, linear.passes)
                p0 = spec.position0
                sw = linear.variant.switch_point
                xy = (p0.x + tri * (sw.x - p0.x), p0.y + tri * (sw.y - p0.y))
            else:
                xy = spec.position0.xy
        self._pos_cache[key] = xy
        return xy

    def scale(self, oid: str, frame: int) -> float:
        spec = self.spec(oid)
        cycle = spec.cycle_of("size_change")
        if cycle is None:
            return spec.scale0
        tri = self.tri(frame, cycle.passes)
        return spec.scale0 + tri * (SIZE_SCALE[cycle.variant.target] - spec.scale0)

    def nominal_size(self, oid: str, frame: int) -> str:
        spec = self.spec(oid)
        cycle = spec.cycle_of("size_change")
        if cycle is None:
            return spec.size0
        r = (frame * cycle.passes) % self.F
        if r == 0:
            return spec.size0
        if 2 * r == self.F:
            return cycle.variant.target
        return "transitional"

    def nominal_color(self, oid: str, frame: int) -> str:
        spec = self.spec(oid)
        cycle = spec.cycle_of("color_change")
        if cycle is None:
            return spec.color0
        tri = self.tri(frame, cycle.passes)
        hue0 = COLOR_HUES[spec.color0]
        hue = (hue0 + tri * hue_arc(hue0, COLOR_HUES[cycle.variant.target])) % 360.0
        return nearest_palette_color(hue)

    def related(self, subject: str, obj: str, relation: str, frame: int) -> bool:
        ax, ay = self.position(subject, frame)
        bx, by = self.position(obj, frame)
        positions = {subject: Vec3(ax, ay, 0.0), obj: Vec3(bx, by, 0.0)}
        return relation_at(positions, self.graph.camera, subject, obj, relation)


def _filter_frames(oracle: _Oracle, members, test, mode: str) -> Value:
    kept = []
    for oid in members:
        if mode == "ever":
            hit = False
            for f in range(oracle.F):
                if test(oid, f):
                    hit = True
                    break
            if hit:
                kept.append(oid)
        else:
            hit = True
            for f in range(oracle.F):
                if not test(oid, f):
                    hit = False
                    break
            if hit:
                kept.append(oid)
    return Value.object_set(kept)


def _pairwise_frames(oracle: _Oracle, a: str, b: str, test, mode: str) -> Value:
    if mode == "ever":
        for f in range(oracle.F):
            if test(a, b, f):
                return Value.boolean(True)
        return Value.boolean(False)
    for f in range(oracle.F):
        if not test(a, b, f):
            return Value.boolean(False)
    return Value.boolean(True)


def _cycle_query(oracle: _Oracle, oid: str, kind: str, what: str) -> Value:
    cycle = oracle.spec(oid).cycle_of(kind)
    if cycle is None:
        return INVALID
    if what == "period":
        return Value.integer(oracle.F // cycle.passes)
    return Value.integer(cycle.passes)


def _apply(oracle: _Oracle, op: str, args: list[Value], params: tuple) -> Value:
    ids = oracle.ids

    if op == "scene":
        return Value.object_set(ids)
    if op == "unique":
        members = args[0].data
        return Value.object_ref(members[0]) if len(members) == 1 else INVALID
    if op == "filter_shape":
        return Value.object_set([o for o in args[0].data
                                 if oracle.spec(o).shape == params[0]])
    if op == "filter_material":
        return Value.object_set([o for o in args[0].data
                                 if oracle.spec(o).material == params[0]])
    if op in ("filter_color_ever", "filter_color_always"):
        mode = op.rsplit("_", 1)[1]
        return _filter_frames(oracle, args[0].data,
                              lambda o, f: oracle.nominal_color(o, f) == params[0], mode)
    if op in ("filter_size_ever", "filter_size_always"):
        mode = op.rsplit("_", 1)[1]
        return _filter_frames(oracle, args[0].data,
                              lambda o, f: oracle.nominal_size(o, f) == params[0], mode)
    if op == "filter_cyclic":
        return Value.object_set([o for o in args[0].data if oracle.spec(o).is_cyclic])
    if op == "filter_moving":
        return Value.object_set([o for o in args[0].data if oracle.spec(o).is_moving])
    for kind in CYCLE_KINDS:
        if op == f"filter_{kind}":
            return Value.object_set([o for o in args[0].data
                                     if oracle.spec(o).has_cycle(kind)])
    if op in ("relate_ever", "relate_always"):
        mode = op.rsplit("_", 1)[1]
        anchor = args[0].data
        kept = []
        for other in ids:
            if other == anchor:
                continue
            if mode == "ever":
                hit = any(oracle.related(other, anchor, params[0], f)
                          for f in range(oracle.F))
            else:
                hit = all(oracle.related(other, anchor, params[0], f)
                          for f in range(oracle.F))
            if hit:
                kept.append(other)
        return Value.object_set(kept)
    if op == "union":
        members = set(args[0].data) | set(args[1].data)
        return Value.object_set([o for o in ids if o in members])
    if op == "intersect":
        other = set(args[1].data)
        return Value.object_set([o for o in args[0].data if o in other])
    if op == "except":
        other = set(args[1].data)
        return Value.object_set([o for o in args[0].data if o not in other])
    if op == "include":
        return Value.boolean(args[0].data in args[1].data)
    if op == "exist":
        return Value.boolean(len(args[0].data) > 0)
    if op == "count":
        total = 0
        for _ in args[0].data:
            total += 1
        return Value.integer(total)
    if op in ("same_size", "same_color", "same_material", "same_shape"):
        attr = {"same_size": "size0", "same_color": "color0",
                "same_material": "material", "same_shape": "shape"}[op]
        anchor = args[0].data
        want = getattr(oracle.spec(anchor), attr)
        return Value.object_set([o for o in ids if o != anchor
                                 and getattr(oracle.spec(o), attr) == want])
    if op == "query_shape":
        return Value.attr(oracle.spec(args[0].data).shape)
    if op == "query_material":
        return Value.attr(oracle.spec(args[0].data).material)
    if op == "query_color":
        spec = oracle.spec(args[0].data)
        return INVALID if spec.has_cycle("color_change") else Value.attr(spec.color0)
    if op == "query_size":
        spec = oracle.spec(args[0].data)
        return INVALID if spec.has_cycle("size_change") else Value.attr(spec.size0)
    if op == "query_color_initial":
        return Value.attr(oracle.spec(args[0].data).color0)
    if op == "query_size_initial":
        return Value.attr(oracle.spec(args[0].data).size0)
    if op == "query_color_final":
        cycle = oracle.spec(args[0].data).cycle_of("color_change")
        return Value.attr(cycle.variant.target) if cycle else INVALID
    if op == "query_size_final":
        cycle = oracle.spec(args[0].data).cycle_of("size_change")
        return Value.attr(cycle.variant.target) if cycle else INVALID
    if op == "query_orbit_direction":
        cycle = oracle.spec(args[0].data).cycle_of("orbit")
        return Value.attr(cycle.variant.direction) if cycle else INVALID
    if op == "query_orbit_center":
        cycle = oracle.spec(args[0].data).cycle_of("orbit")
        return Value.object_ref(cycle.variant.center_id) if cycle else INVALID
    for kind in CYCLE_KINDS:
        if op == f"query_{kind}_period":
            return _cycle_query(oracle, args[0].data, kind, "period")
        if op == f"query_{kind}_passes":
            return _cycle_query(oracle, args[0].data, kind, "passes")
    if op in ("equal_color_ever", "equal_color_always"):
        mode = op.rsplit("_", 1)[1]
        return _pairwise_frames(
            oracle, args[0].data, args[1].data,
            lambda a, b, f: oracle.nominal_color(a, f) == oracle.nominal_color(b, f),
            mode)
    if op in ("equal_size_ever", "equal_size_always"):
        mode = op.rsplit("_", 1)[1]
        return _pairwise_frames(
            oracle, args[0].data, args[1].data,
            lambda a, b, f: abs(oracle.scale(a, f) - oracle.scale(b, f)) <= _SCALE_TOL,
            mode)
    if op in ("equal_color", "equal_size", "equal_shape", "equal_material",
              "equal_object", "equal_integer"):
        return Value.boolean(args[0].data == args[1].data)
    if op == "less_than":
        return Value.boolean(args[0].data < args[1].data)
    if op == "greater_than":
        return Value.boolean(args[0].data > args[1].data)
    if op == "logical_and":
        return Value.boolean(args[0].data and args[1].data)
    if op == "logical_or":
        return Value.boolean(args[0].data or args[1].data)
    if op == "logical_not":
        return Value.boolean(not args[0].data)

    raise ValueError(f"oracle has no interpretation for operator {op!r}")


def run_program(program: FunctionalProgram, graph: SceneGraph) -> Value:
    """Oracle evaluation of a program directly against the scene graph."""
    oracle = _Oracle(graph)
    values: list[Value] = []
    for node in program.nodes:
        args = [values[j] for j in node.inputs]
        if any(arg.is_invalid for arg in args):
            values.append(INVALID)
        else:
            values.append(_apply(oracle, node.op, args, node.params))
    return values[-1]


def brute_force_answer(question: QARecord, temporal: TemporalScene) -> Value:
    """Re-derive the stored answer; reads only the scene graph, never the
    materialized arrays."""
    return run_program(question.program, temporal.graph)
