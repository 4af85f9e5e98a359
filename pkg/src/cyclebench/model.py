"""Core domain model: scenes, objects, cycles, values, and programs.

Everything here is plain immutable data plus validation; time evolution
lives in the engine and the question machinery lives in the questions
package.
"""

from __future__ import annotations

import colorsys
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

FRAME_COUNT_DEFAULT = 160
FPS_DEFAULT = 32
ALLOWED_PASSES = (1, 2, 5)

SIZE_SCALE: Mapping[str, float] = {"small": 0.35, "large": 0.7}
SIZE_CODES: Mapping[str, int] = {"small": 0, "large": 1, "transitional": 2}

SHAPES = ("cube", "sphere", "cylinder", "cone")
MATERIALS = ("metal", "rubber")
SIZES = ("small", "large")
DIRECTIONS = ("clockwise", "counterclockwise")

# Only cubes and cones read as rotating; spheres are featureless and
# cylinders are rotationally symmetric about the spin axis.
ORIENTABLE_SHAPES = ("cube", "cone")

ORBIT_RADIUS_MIN = 1.5
ORBIT_RADIUS_MAX = 3.0

# xy half-footprint of a unit-scale shape; cubes stick out to the corner.
SHAPE_BOUND_FACTOR: Mapping[str, float] = {
    "cube": math.sqrt(2.0),
    "sphere": 1.0,
    "cylinder": 1.0,
    "cone": 1.0,
}

CYCLE_KINDS = (
    "linear_motion",
    "orbit",
    "size_change",
    "color_change",
    "orientation_change",
)

# Which mutable object property each cycle kind drives; two cycles on one
# object must drive different properties.
CYCLE_PROPERTY: Mapping[str, str] = {
    "linear_motion": "position",
    "orbit": "position",
    "size_change": "size",
    "color_change": "color",
    "orientation_change": "orientation",
}


@dataclass(frozen=True)
class PaletteColor:
    name: str
    hue: float
    rgb: tuple[float, float, float]


def _chromatic(name: str, hue: float) -> PaletteColor:
    return PaletteColor(name, hue, colorsys.hsv_to_rgb(hue / 360.0, 0.75, 0.75))


# Order is the tie-break order for nearest-hue classification: equal
# circular distance resolves to the lower index. Gray carries a reference
# hue in the 275..360 gap so it participates in hue classification.
PALETTE: tuple[PaletteColor, ...] = (
    PaletteColor("gray", 330.0, (0.34, 0.34, 0.34)),
    _chromatic("red", 0.0),
    _chromatic("blue", 230.0),
    _chromatic("green", 115.0),
    _chromatic("brown", 30.0),
    _chromatic("purple", 275.0),
    _chromatic("cyan", 180.0),
    _chromatic("yellow", 55.0),
)

COLOR_NAMES: tuple[str, ...] = tuple(c.name for c in PALETTE)
COLOR_HUES: Mapping[str, float] = {c.name: c.hue for c in PALETTE}
COLOR_INDEX: Mapping[str, int] = {c.name: i for i, c in enumerate(PALETTE)}
CHROMATIC_COLORS: tuple[str, ...] = tuple(n for n in COLOR_NAMES if n != "gray")


def circular_hue_distance(a: float, b: float) -> float:
    """Shortest angular distance between two hues, in [0, 180]."""
    d = abs(a % 360.0 - b % 360.0)
    return min(d, 360.0 - d)


def nearest_palette_color(hue: float) -> str:
    """Classify a hue to the nearest palette color; ties pick the lower index."""
    best_name = PALETTE[0].name
    best_d = circular_hue_distance(hue, PALETTE[0].hue)
    for color in PALETTE[1:]:
        d = circular_hue_distance(hue, color.hue)
        if d < best_d:
            best_d = d
            best_name = color.name
    return best_name


def hue_arc(hue0: float, hue1: float) -> float:
    """Signed shorter arc from hue0 to hue1; a 180 tie goes the increasing way."""
    d = (hue1 - hue0) % 360.0
    if d <= 180.0:
        return d
    return d - 360.0


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def to_json(self) -> list[float]:
        return [self.x, self.y, self.z]

    @staticmethod
    def from_json(data: Iterable[float]) -> "Vec3":
        x, y, z = data
        return Vec3(float(x), float(y), float(z))

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class LinearMotion:
    """Back-and-forth translation between the rest point and switch_point."""

    switch_point: Vec3
    kind = "linear_motion"


@dataclass(frozen=True)
class Orbit:
    """Circular motion around another object's concurrent position."""

    center_id: str
    radius: float
    initial_angle: float
    direction: str  # "clockwise" | "counterclockwise"
    kind = "orbit"


@dataclass(frozen=True)
class SizeChange:
    """Linear ramp between the rest size and the target size and back."""

    target: str  # "small" | "large"
    kind = "size_change"


@dataclass(frozen=True)
class ColorChange:
    """Hue interpolation along the shorter arc to the target color and back."""

    target: str  # palette color name
    kind = "color_change"


@dataclass(frozen=True)
class OrientationChange:
    """In-place spin about the vertical axis, whole turns per cycle."""

    turns: int = 1
    kind = "orientation_change"


CycleVariant = Union[LinearMotion, Orbit, SizeChange, ColorChange, OrientationChange]


@dataclass(frozen=True)
class CycleSpec:
    variant: CycleVariant
    frequency_hz: float
    passes: int

    @property
    def kind(self) -> str:
        return self.variant.kind

    @property
    def target_property(self) -> str:
        return CYCLE_PROPERTY[self.variant.kind]

    def period_frames(self, frame_count: int) -> int:
        return frame_count // self.passes


@dataclass(frozen=True)
class ObjectSpec:
    id: str
    shape: str
    material: str
    size0: str
    color0: str
    position0: Vec3
    orientation0: float
    cycles: tuple[CycleSpec, ...] = ()
    mesh_ref: str = ""

    def __post_init__(self) -> None:
        if not self.mesh_ref:
            object.__setattr__(self, "mesh_ref", f"mesh/{self.shape}")

    def cycle_of(self, kind: str) -> CycleSpec | None:
        for cycle in self.cycles:
            if cycle.kind == kind:
                return cycle
        return None

    def has_cycle(self, kind: str) -> bool:
        return self.cycle_of(kind) is not None

    @property
    def is_cyclic(self) -> bool:
        return bool(self.cycles)

    @property
    def is_moving(self) -> bool:
        return self.has_cycle("linear_motion") or self.has_cycle("orbit")

    @property
    def scale0(self) -> float:
        return SIZE_SCALE[self.size0]

    def bound_factor(self) -> float:
        return SHAPE_BOUND_FACTOR[self.shape]


def validate_spec(spec: ObjectSpec) -> list[str]:
    """Return human-readable invariant violations for one object (empty = valid)."""
    problems: list[str] = []
    if spec.shape not in SHAPES:
        problems.append(f"{spec.id}: unknown shape {spec.shape!r}")
    if spec.material not in MATERIALS:
        problems.append(f"{spec.id}: unknown material {spec.material!r}")
    if spec.size0 not in SIZES:
        problems.append(f"{spec.id}: unknown size {spec.size0!r}")
    if spec.color0 not in COLOR_NAMES:
        problems.append(f"{spec.id}: unknown color {spec.color0!r}")
    if not 0.0 <= spec.orientation0 < 360.0:
        problems.append(f"{spec.id}: orientation0 {spec.orientation0} outside [0, 360)")

    seen_properties: set[str] = set()
    for cycle in spec.cycles:
        prop = cycle.target_property
        if prop in seen_properties:
            problems.append(f"{spec.id}: two cycles drive the {prop} property")
        seen_properties.add(prop)
        if cycle.passes not in ALLOWED_PASSES:
            problems.append(f"{spec.id}: passes {cycle.passes} not in {ALLOWED_PASSES}")
        variant = cycle.variant
        if isinstance(variant, Orbit):
            if not ORBIT_RADIUS_MIN <= variant.radius <= ORBIT_RADIUS_MAX:
                problems.append(f"{spec.id}: orbit radius {variant.radius} outside "
                                f"[{ORBIT_RADIUS_MIN}, {ORBIT_RADIUS_MAX}]")
            if not 0.0 <= variant.initial_angle < 360.0:
                problems.append(f"{spec.id}: orbit angle {variant.initial_angle} outside [0, 360)")
            if variant.direction not in DIRECTIONS:
                problems.append(f"{spec.id}: orbit direction {variant.direction!r}")
            if variant.center_id == spec.id:
                problems.append(f"{spec.id}: orbits itself")
        elif isinstance(variant, SizeChange):
            if variant.target not in SIZES:
                problems.append(f"{spec.id}: size target {variant.target!r}")
            elif variant.target == spec.size0:
                problems.append(f"{spec.id}: size cycle with no size change")
        elif isinstance(variant, ColorChange):
            if variant.target not in COLOR_NAMES:
                problems.append(f"{spec.id}: color target {variant.target!r}")
            elif variant.target == spec.color0:
                problems.append(f"{spec.id}: color cycle with no color change")
        elif isinstance(variant, OrientationChange):
            if spec.shape not in ORIENTABLE_SHAPES:
                problems.append(f"{spec.id}: orientation cycle on a {spec.shape}")
            if variant.turns < 1:
                problems.append(f"{spec.id}: orientation turns {variant.turns} < 1")
    return problems


@dataclass(frozen=True)
class Bounds:
    x: tuple[float, float] = (-4.0, 4.0)
    y: tuple[float, float] = (-4.0, 4.0)


@dataclass(frozen=True)
class CameraConfig:
    eye: Vec3
    look_at: Vec3

    @property
    def forward(self) -> tuple[float, float]:
        """Ground-plane unit vector from eye toward look_at."""
        dx = self.look_at.x - self.eye.x
        dy = self.look_at.y - self.eye.y
        norm = math.hypot(dx, dy)
        return (dx / norm, dy / norm)

    @property
    def right(self) -> tuple[float, float]:
        """Ground-plane unit vector pointing screen-right."""
        fx, fy = self.forward
        return (fy, -fx)


@dataclass(frozen=True)
class Modulation:
    floor: float
    period_frames: int


@dataclass(frozen=True)
class LightConfig:
    name: str
    position: Vec3
    intensity: float
    modulation: Modulation | None = None


@dataclass(frozen=True)
class SceneGraph:
    scene_id: str
    tier: str
    seed: int
    frame_count: int
    fps: int
    bounds: Bounds
    camera: CameraConfig
    lights: tuple[LightConfig, ...]
    objects: tuple[ObjectSpec, ...]

    def object_ids(self) -> tuple[str, ...]:
        return tuple(obj.id for obj in self.objects)

    def index_of(self, object_id: str) -> int:
        for i, obj in enumerate(self.objects):
            if obj.id == object_id:
                return i
        raise KeyError(object_id)

    def object(self, object_id: str) -> ObjectSpec:
        return self.objects[self.index_of(object_id)]

    @property
    def duration_s(self) -> float:
        return self.frame_count / self.fps


class CyclicOrbitError(ValueError):
    """Orbit center references form a cycle; states cannot be evaluated."""


def orbit_order(graph: SceneGraph) -> list[int]:
    """Topological evaluation order over orbit-center dependencies.

    Raises CyclicOrbitError if the center references loop, and KeyError if a
    center id does not exist in the scene.
    """
    index = {obj.id: i for i, obj in enumerate(graph.objects)}
    depends: list[int] = []
    for obj in graph.objects:
        orbit = obj.cycle_of("orbit")
        if orbit is None:
            depends.append(-1)
        else:
            depends.append(index[orbit.variant.center_id])

    order: list[int] = []
    state = [0] * len(depends)  # 0 new, 1 visiting, 2 done

    def visit(i: int) -> None:
        if state[i] == 2:
            return
        if state[i] == 1:
            raise CyclicOrbitError(
                f"orbit centers form a cycle through {graph.objects[i].id}")
        state[i] = 1
        if depends[i] >= 0:
            visit(depends[i])
        state[i] = 2
        order.append(i)

    for i in range(len(depends)):
        visit(i)
    return order


def validate_graph(graph: SceneGraph) -> list[str]:
    """Scene-level invariant violations (empty = valid)."""
    problems: list[str] = []
    ids = graph.object_ids()
    if len(set(ids)) != len(ids):
        problems.append("duplicate object ids")
    for spec in graph.objects:
        problems.extend(validate_spec(spec))
        orbit = spec.cycle_of("orbit")
        if orbit is not None and orbit.variant.center_id not in ids:
            problems.append(f"{spec.id}: orbit center {orbit.variant.center_id!r} not in scene")
    try:
        orbit_order(graph)
    except CyclicOrbitError as exc:
        problems.append(str(exc))
    except KeyError:
        pass  # already reported above
    if graph.frame_count <= 0 or graph.fps <= 0:
        problems.append("frame_count and fps must be positive")
    for spec in graph.objects:
        for cycle in spec.cycles:
            if graph.frame_count % cycle.passes != 0:
                problems.append(f"{spec.id}: passes {cycle.passes} does not divide "
                                f"frame_count {graph.frame_count}")
            expect = cycle.passes * graph.fps / graph.frame_count
            if abs(cycle.frequency_hz - expect) > 1e-9:
                problems.append(f"{spec.id}: frequency {cycle.frequency_hz} != "
                                f"passes*fps/frame_count = {expect}")
    for light in graph.lights:
        if light.modulation is not None:
            if graph.frame_count % light.modulation.period_frames != 0:
                problems.append(f"light {light.name}: modulation period "
                                f"{light.modulation.period_frames} does not divide "
                                f"frame_count {graph.frame_count}")
    return problems


@dataclass(frozen=True)
class ObjectState:
    """One object's full pose at one frame."""

    position: Vec3
    orientation: float
    scale: float
    color_hue: float
    nominal_size: str
    nominal_color: str


class ValueKind(enum.Enum):
    OBJECT_SET = "object_set"
    OBJECT = "object"
    ATTR = "attr"
    INT = "int"
    BOOL = "bool"
    INVALID = "invalid"


@dataclass(frozen=True)
class Value:
    """Tagged value in the program lattice; INVALID absorbs every operator."""

    kind: ValueKind
    data: object = None

    @staticmethod
    def object_set(ids: Iterable[str]) -> "Value":
        return Value(ValueKind.OBJECT_SET, tuple(ids))

    @staticmethod
    def object_ref(object_id: str) -> "Value":
        return Value(ValueKind.OBJECT, object_id)

    @staticmethod
    def attr(value: str) -> "Value":
        return Value(ValueKind.ATTR, value)

    @staticmethod
    def integer(value: int) -> "Value":
        return Value(ValueKind.INT, int(value))

    @staticmethod
    def boolean(value: bool) -> "Value":
        return Value(ValueKind.BOOL, bool(value))

    @property
    def is_invalid(self) -> bool:
        return self.kind is ValueKind.INVALID

    def to_json(self) -> object:
        if self.kind is ValueKind.OBJECT_SET:
            return list(self.data)
        if self.kind is ValueKind.INVALID:
            return None
        return self.data


INVALID = Value(ValueKind.INVALID)


@dataclass(frozen=True)
class ProgramNode:
    op: str
    params: tuple = ()
    inputs: tuple[int, ...] = ()


@dataclass(frozen=True)
class FunctionalProgram:
    """DAG of operator nodes; the last node is the single sink."""

    nodes: tuple[ProgramNode, ...]

    def __post_init__(self) -> None:
        for i, node in enumerate(self.nodes):
            for j in node.inputs:
                if not 0 <= j < i:
                    raise ValueError(f"node {i} ({node.op}) input {j} is not an earlier node")

    def to_json(self) -> list[dict]:
        return [
            {"op": n.op, "params": list(n.params), "inputs": list(n.inputs)}
            for n in self.nodes
        ]

    @staticmethod
    def from_json(data: Iterable[Mapping]) -> "FunctionalProgram":
        return FunctionalProgram(tuple(
            ProgramNode(d["op"], tuple(d.get("params", ())), tuple(d.get("inputs", ())))
            for d in data
        ))


ANSWER_KINDS = ("yes_no", "attribute", "integer")


@dataclass(frozen=True)
class QARecord:
    question_id: str
    scene_id: str
    tier: str
    template_id: str
    quantifier: str  # "existential" | "universal" | "none"
    question: str
    answer: Value
    answer_kind: str
    program: FunctionalProgram


@dataclass(frozen=True)
class JudgedAnswer:
    """A judge-normalized model answer; value None means Indefinite."""

    question_id: str
    value: Value | None

    @property
    def is_indefinite(self) -> bool:
        return self.value is None


@dataclass(frozen=True)
class CaptionObject:
    """One object claimed by a caption: stated attributes plus cycle kinds."""

    attributes: Mapping[str, str]
    cycles: tuple[str, ...] = ()


@dataclass(frozen=True)
class SceneCaption:
    scene_id: str
    objects: tuple[CaptionObject, ...]
