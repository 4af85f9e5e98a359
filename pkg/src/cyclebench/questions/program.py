"""Typed functional-program evaluator over materialized scenes.

Programs are DAGs of operators over a small value lattice: object sets,
single objects, attribute strings, integers, booleans, and Invalid.
Invalid absorbs: any operator receiving an Invalid input yields Invalid
without running. Object sets are kept in scene order so results compare
deterministically across evaluation paths.

Temporal quantifiers come in pairs: *_ever holds if the condition holds on
at least one frame, *_always if it holds on every frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..engine import TemporalScene
from ..model import (
    COLOR_INDEX,
    COLOR_NAMES,
    CYCLE_KINDS,
    INVALID,
    MATERIALS,
    SHAPES,
    SIZE_CODES,
    SIZES,
    FunctionalProgram,
    ObjectSpec,
    Value,
    ValueKind,
)
from ..relations import RELATIONS, build_tables

# Two size-cycling objects count as "the same size" on a frame only when
# their scales agree to this tolerance (i.e. synchronized cycles).
SCALE_TOL = 1e-9

_SET = ValueKind.OBJECT_SET
_OBJ = ValueKind.OBJECT
_ATTR = ValueKind.ATTR
_INT = ValueKind.INT
_BOOL = ValueKind.BOOL


class _Ctx:
    def __init__(self, temporal: TemporalScene):
        self.temporal = temporal
        self.graph = temporal.graph
        self.ids = list(self.graph.object_ids())
        self.index = {oid: i for i, oid in enumerate(self.ids)}
        self.tables = temporal.relations or build_tables(temporal)

    def spec(self, oid: str) -> ObjectSpec:
        return self.graph.objects[self.index[oid]]

    def row(self, oid: str) -> int:
        return self.index[oid]


@dataclass(frozen=True)
class OpSpec:
    name: str
    in_kinds: tuple[ValueKind, ...]
    out_kind: ValueKind
    params: tuple[str, ...]
    fn: Callable


REGISTRY: dict[str, OpSpec] = {}


def _register(name: str, in_kinds: tuple, out_kind: ValueKind,
              params: tuple[str, ...] = ()):
    def wrap(fn: Callable) -> Callable:
        REGISTRY[name] = OpSpec(name, in_kinds, out_kind, params, fn)
        return fn

    return wrap


def _subset(ids, keep) -> Value:
    return Value.object_set([oid for oid in ids if keep(oid)])


@_register("scene", (), _SET)
def _scene(ctx, args, params):
    return Value.object_set(ctx.ids)


@_register("unique", (_SET,), _OBJ)
def _unique(ctx, args, params):
    members = args[0].data
    if len(members) != 1:
        return INVALID
    return Value.object_ref(members[0])


@_register("filter_shape", (_SET,), _SET, ("shape",))
def _filter_shape(ctx, args, params):
    return _subset(args[0].data, lambda oid: ctx.spec(oid).shape == params[0])


@_register("filter_material", (_SET,), _SET, ("material",))
def _filter_material(ctx, args, params):
    return _subset(args[0].data, lambda oid: ctx.spec(oid).material == params[0])


@_register("filter_color_ever", (_SET,), _SET, ("color",))
def _filter_color_ever(ctx, args, params):
    code = COLOR_INDEX[params[0]]
    codes = ctx.temporal.color_codes
    return _subset(args[0].data, lambda oid: bool((codes[ctx.row(oid)] == code).any()))


@_register("filter_color_always", (_SET,), _SET, ("color",))
def _filter_color_always(ctx, args, params):
    code = COLOR_INDEX[params[0]]
    codes = ctx.temporal.color_codes
    return _subset(args[0].data, lambda oid: bool((codes[ctx.row(oid)] == code).all()))


@_register("filter_size_ever", (_SET,), _SET, ("size",))
def _filter_size_ever(ctx, args, params):
    code = SIZE_CODES[params[0]]
    codes = ctx.temporal.size_codes
    return _subset(args[0].data, lambda oid: bool((codes[ctx.row(oid)] == code).any()))


@_register("filter_size_always", (_SET,), _SET, ("size",))
def _filter_size_always(ctx, args, params):
    code = SIZE_CODES[params[0]]
    codes = ctx.temporal.size_codes
    return _subset(args[0].data, lambda oid: bool((codes[ctx.row(oid)] == code).all()))


def _register_cycle_filter(name: str, pred):
    @_register(name, (_SET,), _SET)
    def _fn(ctx, args, params, pred=pred):
        return _subset(args[0].data, lambda oid: pred(ctx.spec(oid)))


_register_cycle_filter("filter_cyclic", lambda spec: spec.is_cyclic)
_register_cycle_filter("filter_moving", lambda spec: spec.is_moving)
for _kind in CYCLE_KINDS:
    _register_cycle_filter(f"filter_{_kind}",
                           (lambda k: lambda spec: spec.has_cycle(k))(_kind))


@_register("relate_ever", (_OBJ,), _SET, ("relation",))
def _relate_ever(ctx, args, params):
    return Value.object_set(ctx.tables.subjects_ever(params[0], args[0].data))


@_register("relate_always", (_OBJ,), _SET, ("relation",))
def _relate_always(ctx, args, params):
    return Value.object_set(ctx.tables.subjects_always(params[0], args[0].data))


@_register("union", (_SET, _SET), _SET)
def _union(ctx, args, params):
    members = set(args[0].data) | set(args[1].data)
    return Value.object_set([oid for oid in ctx.ids if oid in members])


@_register("intersect", (_SET, _SET), _SET)
def _intersect(ctx, args, params):
    other = set(args[1].data)
    return Value.object_set([oid for oid in args[0].data if oid in other])


@_register("except", (_SET, _SET), _SET)
def _except(ctx, args, params):
    other = set(args[1].data)
    return Value.object_set([oid for oid in args[0].data if oid not in other])


@_register("include", (_OBJ, _SET), _BOOL)
def _include(ctx, args, params):
    return Value.boolean(args[0].data in args[1].data)


@_register("exist", (_SET,), _BOOL)
def _exist(ctx, args, params):
    return Value.boolean(len(args[0].data) > 0)


@_register("count", (_SET,), _INT)
def _count(ctx, args, params):
    return Value.integer(len(args[0].data))


def _register_same(name: str, getter):
    @_register(name, (_OBJ,), _SET)
    def _fn(ctx, args, params, getter=getter):
        oid = args[0].data
        anchor = getter(ctx.spec(oid))
        return Value.object_set([other for other in ctx.ids
                                 if other != oid and getter(ctx.spec(other)) == anchor])


# "same" comparisons use frame-0 values (size0/color0), excluding the anchor
_register_same("same_size", lambda spec: spec.size0)
_register_same("same_color", lambda spec: spec.color0)
_register_same("same_material", lambda spec: spec.material)
_register_same("same_shape", lambda spec: spec.shape)


@_register("query_shape", (_OBJ,), _ATTR)
def _query_shape(ctx, args, params):
    return Value.attr(ctx.spec(args[0].data).shape)


@_register("query_material", (_OBJ,), _ATTR)
def _query_material(ctx, args, params):
    return Value.attr(ctx.spec(args[0].data).material)


@_register("query_color", (_OBJ,), _ATTR)
def _query_color(ctx, args, params):
    spec = ctx.spec(args[0].data)
    if spec.has_cycle("color_change"):
        return INVALID
    return Value.attr(spec.color0)


@_register("query_size", (_OBJ,), _ATTR)
def _query_size(ctx, args, params):
    spec = ctx.spec(args[0].data)
    if spec.has_cycle("size_change"):
        return INVALID
    return Value.attr(spec.size0)


@_register("query_color_initial", (_OBJ,), _ATTR)
def _query_color_initial(ctx, args, params):
    return Value.attr(ctx.spec(args[0].data).color0)


@_register("query_size_initial", (_OBJ,), _ATTR)
def _query_size_initial(ctx, args, params):
    return Value.attr(ctx.spec(args[0].data).size0)


@_register("query_color_final", (_OBJ,), _ATTR)
def _query_color_final(ctx, args, params):
    cycle = ctx.spec(args[0].data).cycle_of("color_change")
    if cycle is None:
        return INVALID
    return Value.attr(cycle.variant.target)


@_register("query_size_final", (_OBJ,), _ATTR)
def _query_size_final(ctx, args, params):
    cycle = ctx.spec(args[0].data).cycle_of("size_change")
    if cycle is None:
        return INVALID
    return Value.attr(cycle.variant.target)


@_register("query_orbit_direction", (_OBJ,), _ATTR)
def _query_orbit_direction(ctx, args, params):
    cycle = ctx.spec(args[0].data).cycle_of("orbit")
    if cycle is None:
        return INVALID
    return Value.attr(cycle.variant.direction)


@_register("query_orbit_center", (_OBJ,), _OBJ)
def _query_orbit_center(ctx, args, params):
    cycle = ctx.spec(args[0].data).cycle_of("orbit")
    if cycle is None:
        return INVALID
    return Value.object_ref(cycle.variant.center_id)


def _register_cycle_queries(kind: str):
    @_register(f"query_{kind}_period", (_OBJ,), _INT)
    def _period(ctx, args, params, kind=kind):
        cycle = ctx.spec(args[0].data).cycle_of(kind)
        if cycle is None:
            return INVALID
        return Value.integer(cycle.period_frames(ctx.graph.frame_count))

    @_register(f"query_{kind}_passes", (_OBJ,), _INT)
    def _passes(ctx, args, params, kind=kind):
        cycle = ctx.spec(args[0].data).cycle_of(kind)
        if cycle is None:
            return INVALID
        return Value.integer(cycle.passes)


for _kind in CYCLE_KINDS:
    _register_cycle_queries(_kind)


@_register("equal_color_ever", (_OBJ, _OBJ), _BOOL)
def _equal_color_ever(ctx, args, params):
    codes = ctx.temporal.color_codes
    a, b = ctx.row(args[0].data), ctx.row(args[1].data)
    return Value.boolean(bool((codes[a] == codes[b]).any()))


@_register("equal_color_always", (_OBJ, _OBJ), _BOOL)
def _equal_color_always(ctx, args, params):
    codes = ctx.temporal.color_codes
    a, b = ctx.row(args[0].data), ctx.row(args[1].data)
    return Value.boolean(bool((codes[a] == codes[b]).all()))


@_register("equal_size_ever", (_OBJ, _OBJ), _BOOL)
def _equal_size_ever(ctx, args, params):
    scales = ctx.temporal.scales
    a, b = ctx.row(args[0].data), ctx.row(args[1].data)
    return Value.boolean(bool((abs(scales[a] - scales[b]) <= SCALE_TOL).any()))


@_register("equal_size_always", (_OBJ, _OBJ), _BOOL)
def _equal_size_always(ctx, args, params):
    scales = ctx.temporal.scales
    a, b = ctx.row(args[0].data), ctx.row(args[1].data)
    return Value.boolean(bool((abs(scales[a] - scales[b]) <= SCALE_TOL).all()))


def _register_attr_equal(name: str):
    @_register(name, (_ATTR, _ATTR), _BOOL)
    def _fn(ctx, args, params):
        return Value.boolean(args[0].data == args[1].data)


for _name in ("equal_color", "equal_size", "equal_shape", "equal_material"):
    _register_attr_equal(_name)


@_register("equal_object", (_OBJ, _OBJ), _BOOL)
def _equal_object(ctx, args, params):
    return Value.boolean(args[0].data == args[1].data)


@_register("equal_integer", (_INT, _INT), _BOOL)
def _equal_integer(ctx, args, params):
    return Value.boolean(args[0].data == args[1].data)


@_register("less_than", (_INT, _INT), _BOOL)
def _less_than(ctx, args, params):
    return Value.boolean(args[0].data < args[1].data)


@_register("greater_than", (_INT, _INT), _BOOL)
def _greater_than(ctx, args, params):
    return Value.boolean(args[0].data > args[1].data)


@_register("logical_and", (_BOOL, _BOOL), _BOOL)
def _logical_and(ctx, args, params):
    return Value.boolean(args[0].data and args[1].data)


@_register("logical_or", (_BOOL, _BOOL), _BOOL)
def _logical_or(ctx, args, params):
    return Value.boolean(args[0].data or args[1].data)


@_register("logical_not", (_BOOL,), _BOOL)
def _logical_not(ctx, args, params):
    return Value.boolean(not args[0].data)


_PARAM_DOMAINS = {
    "shape": SHAPES,
    "material": MATERIALS,
    "size": SIZES,
    "color": COLOR_NAMES,
    "relation": RELATIONS,
}


def validate(program: FunctionalProgram) -> None:
    """Raise ValueError on unknown ops, arity/type mismatches, bad params,
    or a DAG whose intermediate nodes are never consumed (multiple sinks)."""
    if not program.nodes:
        raise ValueError("empty program")
    kinds: list[ValueKind] = []
    consumed = [False] * len(program.nodes)
    for i, node in enumerate(program.nodes):
        spec = REGISTRY.get(node.op)
        if spec is None:
            raise ValueError(f"unknown operator {node.op!r}")
        if len(node.inputs) != len(spec.in_kinds):
            raise ValueError(f"node {i} ({node.op}): expected {len(spec.in_kinds)} "
                             f"inputs, got {len(node.inputs)}")
        for j, expected in zip(node.inputs, spec.in_kinds):
            if kinds[j] is not expected:
                raise ValueError(f"node {i} ({node.op}): input {j} has kind "
                                 f"{kinds[j].value}, expected {expected.value}")
            consumed[j] = True
        if len(node.params) != len(spec.params):
            raise ValueError(f"node {i} ({node.op}): expected {len(spec.params)} "
                             f"params, got {len(node.params)}")
        for slot, value in zip(spec.params, node.params):
            domain = _PARAM_DOMAINS[slot]
            if value not in domain:
                raise ValueError(f"node {i} ({node.op}): param {value!r} not a {slot}")
        kinds.append(spec.out_kind)
    for i in range(len(program.nodes) - 1):
        if not consumed[i]:
            raise ValueError(f"node {i} ({program.nodes[i].op}) is not consumed; "
                             "programs must have a single sink")


def execute(program: FunctionalProgram, temporal: TemporalScene) -> Value:
    """Evaluate a program; semantic failures yield Invalid, never raise."""
    validate(program)
    ctx = _Ctx(temporal)
    values: list[Value] = []
    for node in program.nodes:
        spec = REGISTRY[node.op]
        args = tuple(values[j] for j in node.inputs)
        if any(arg.is_invalid for arg in args):
            values.append(INVALID)
        else:
            values.append(spec.fn(ctx, args, node.params))
    return values[-1]
