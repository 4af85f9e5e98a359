"""Cycle evaluation: pure per-cycle functions and full-scene materialization.

Every cycle is periodic by construction: the evaluated property at
t = l / frequency equals the t = 0 value for any whole number of cycles l.
Materialization over the frame grid uses integer phase arithmetic
(r = frame * passes mod frame_count) so cycle endpoints are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import backend as backend_pkg
from .model import (
    COLOR_HUES,
    COLOR_INDEX,
    COLOR_NAMES,
    SIZE_CODES,
    SIZE_SCALE,
    ObjectSpec,
    ObjectState,
    SceneGraph,
    Vec3,
    hue_arc,
    nearest_palette_color,
    orbit_order,
)

if TYPE_CHECKING:
    from .relations import RelationTables

# Endpoint detection tolerance for the float-time evaluation path; the
# frame-grid path uses integer phases and needs none.
_PHASE_EPS = 1e-12

_NOMINAL_SIZES = ("small", "large", "transitional")


@dataclass(frozen=True)
class TimeGrid:
    frame_count: int = 160
    fps: int = 32

    @property
    def duration_s(self) -> float:
        return self.frame_count / self.fps

    def t(self, frame: int) -> float:
        return frame / self.fps


def triangle_phase(x: float) -> float:
    """Triangular wave of the unit phase: 0 at whole cycles, 1 at half cycles."""
    u = x % 1.0
    if u <= 0.5:
        return 2.0 * u
    return 2.0 * (1.0 - u)


def eval_linear(p0: Vec3, switch_point: Vec3, frequency_hz: float, t: float) -> Vec3:
    """Position on the back-and-forth segment at time t (constant speed)."""
    tri = triangle_phase(frequency_hz * t)
    return Vec3(p0.x + tri * (switch_point.x - p0.x),
                p0.y + tri * (switch_point.y - p0.y),
                p0.z + tri * (switch_point.z - p0.z))


def eval_orbit(center: Vec3, radius: float, initial_angle: float, direction: str,
               frequency_hz: float, t: float) -> Vec3:
    """Position on the circle around center at time t; counterclockwise is +."""
    sign = 1.0 if direction == "counterclockwise" else -1.0
    ang = (initial_angle + sign * 360.0 * ((frequency_hz * t) % 1.0)) * math.pi / 180.0
    return Vec3(center.x + radius * math.cos(ang),
                center.y + radius * math.sin(ang),
                center.z)


def eval_size(size0: str, target: str, frequency_hz: float, t: float) -> tuple[float, str]:
    """Scale and nominal size label at time t of a size cycle."""
    u = (frequency_hz * t) % 1.0
    tri = 2.0 * u if u <= 0.5 else 2.0 * (1.0 - u)
    s0 = SIZE_SCALE[size0]
    s1 = SIZE_SCALE[target]
    scale = s0 + tri * (s1 - s0)
    if u < _PHASE_EPS or u > 1.0 - _PHASE_EPS:
        nominal = size0
    elif abs(u - 0.5) < _PHASE_EPS:
        nominal = target
    else:
        nominal = "transitional"
    return scale, nominal


def eval_color(hue0: float, hue_target: float, frequency_hz: float, t: float) -> float:
    """Hue at time t, interpolating along the shorter arc and back."""
    tri = triangle_phase(frequency_hz * t)
    return (hue0 + tri * hue_arc(hue0, hue_target)) % 360.0


def eval_orientation(orientation0: float, turns: int, frequency_hz: float, t: float) -> float:
    """Orientation at time t: `turns` whole revolutions per cycle, wrapped."""
    return (orientation0 + turns * 360.0 * ((frequency_hz * t) % 1.0)) % 360.0


def eval_light(base_intensity: float, floor: float, period_frames: int, frame: int) -> float:
    """Sinusoidal light intensity, dipping to floor * base at the half period."""
    phase = 2.0 * math.pi * (frame % period_frames) / period_frames
    return base_intensity * (floor + (1.0 - floor) * (0.5 + 0.5 * math.cos(phase)))


def object_state_at(graph: SceneGraph, object_id: str, t: float) -> ObjectState:
    """Scalar evaluation of one object's full state at an arbitrary time."""
    spec = graph.object(object_id)

    def position_of(obj: ObjectSpec, depth: int = 0) -> Vec3:
        if depth > len(graph.objects):
            raise ValueError(f"orbit centers form a cycle through {obj.id}")
        orbit = obj.cycle_of("orbit")
        if orbit is not None:
            center = position_of(graph.object(orbit.variant.center_id), depth + 1)
            return eval_orbit(center, orbit.variant.radius, orbit.variant.initial_angle,
                              orbit.variant.direction, orbit.frequency_hz, t)
        linear = obj.cycle_of("linear_motion")
        if linear is not None:
            return eval_linear(obj.position0, linear.variant.switch_point,
                               linear.frequency_hz, t)
        return obj.position0

    size_cycle = spec.cycle_of("size_change")
    if size_cycle is not None:
        scale, nominal_size = eval_size(spec.size0, size_cycle.variant.target,
                                        size_cycle.frequency_hz, t)
    else:
        scale, nominal_size = spec.scale0, spec.size0

    color_cycle = spec.cycle_of("color_change")
    if color_cycle is not None:
        hue = eval_color(COLOR_HUES[spec.color0], COLOR_HUES[color_cycle.variant.target],
                         color_cycle.frequency_hz, t)
        nominal_color = nearest_palette_color(hue)
    else:
        hue = COLOR_HUES[spec.color0]
        nominal_color = spec.color0

    orient_cycle = spec.cycle_of("orientation_change")
    if orient_cycle is not None:
        orientation = eval_orientation(spec.orientation0, orient_cycle.variant.turns,
                                       orient_cycle.frequency_hz, t)
    else:
        orientation = spec.orientation0

    xy = position_of(spec)
    return ObjectState(position=Vec3(xy.x, xy.y, scale), orientation=orientation,
                       scale=scale, color_hue=hue, nominal_size=nominal_size,
                       nominal_color=nominal_color)


@dataclass(frozen=True)
class PackedScene:
    """Array-of-struct layout consumed by the kernel backends."""

    count: int
    frame_count: int
    order: np.ndarray
    motion_kind: np.ndarray
    base_xy: np.ndarray
    switch_xy: np.ndarray
    pos_passes: np.ndarray
    center_idx: np.ndarray
    radius: np.ndarray
    gamma0: np.ndarray
    dir_sign: np.ndarray
    scale0: np.ndarray
    scale1: np.ndarray
    size_passes: np.ndarray
    size0_code: np.ndarray
    size1_code: np.ndarray
    hue0: np.ndarray
    hue_delta: np.ndarray
    color_passes: np.ndarray
    color0_idx: np.ndarray
    orient0: np.ndarray
    orient_turns: np.ndarray
    orient_passes: np.ndarray
    palette_hues: np.ndarray
    bound_factor: np.ndarray


def pack(graph: SceneGraph) -> PackedScene:
    """Flatten a scene graph into kernel-ready arrays (validates orbit refs)."""
    k = len(graph.objects)
    order = np.asarray(orbit_order(graph), dtype=np.int64)
    index = {obj.id: i for i, obj in enumerate(graph.objects)}

    motion_kind = np.zeros(k, dtype=np.int64)
    base_xy = np.zeros((k, 2), dtype=np.float64)
    switch_xy = np.zeros((k, 2), dtype=np.float64)
    pos_passes = np.zeros(k, dtype=np.int64)
    center_idx = np.full(k, -1, dtype=np.int64)
    radius = np.zeros(k, dtype=np.float64)
    gamma0 = np.zeros(k, dtype=np.float64)
    dir_sign = np.ones(k, dtype=np.float64)
    scale0 = np.zeros(k, dtype=np.float64)
    scale1 = np.zeros(k, dtype=np.float64)
    size_passes = np.zeros(k, dtype=np.int64)
    size0_code = np.zeros(k, dtype=np.int64)
    size1_code = np.zeros(k, dtype=np.int64)
    hue0 = np.zeros(k, dtype=np.float64)
    hue_delta = np.zeros(k, dtype=np.float64)
    color_passes = np.zeros(k, dtype=np.int64)
    color0_idx = np.zeros(k, dtype=np.int64)
    orient0 = np.zeros(k, dtype=np.float64)
    orient_turns = np.zeros(k, dtype=np.int64)
    orient_passes = np.zeros(k, dtype=np.int64)
    bound_factor = np.zeros(k, dtype=np.float64)

    for i, obj in enumerate(graph.objects):
        base_xy[i] = obj.position0.xy
        switch_xy[i] = obj.position0.xy
        scale0[i] = obj.scale0
        scale1[i] = obj.scale0
        size0_code[i] = SIZE_CODES[obj.size0]
        size1_code[i] = SIZE_CODES[obj.size0]
        hue0[i] = COLOR_HUES[obj.color0]
        color0_idx[i] = COLOR_INDEX[obj.color0]
        orient0[i] = obj.orientation0
        bound_factor[i] = obj.bound_factor()

        for cycle in obj.cycles:
            kind = cycle.kind
            if kind == "linear_motion":
                motion_kind[i] = 1
                switch_xy[i] = cycle.variant.switch_point.xy
                pos_passes[i] = cycle.passes
            elif kind == "orbit":
                motion_kind[i] = 2
                center_idx[i] = index[cycle.variant.center_id]
                radius[i] = cycle.variant.radius
                gamma0[i] = cycle.variant.initial_angle
                dir_sign[i] = 1.0 if cycle.variant.direction == "counterclockwise" else -1.0
                pos_passes[i] = cycle.passes
            elif kind == "size_change":
                size_passes[i] = cycle.passes
                scale1[i] = SIZE_SCALE[cycle.variant.target]
                size1_code[i] = SIZE_CODES[cycle.variant.target]
            elif kind == "color_change":
                color_passes[i] = cycle.passes
                hue_delta[i] = hue_arc(hue0[i], COLOR_HUES[cycle.variant.target])
            elif kind == "orientation_change":
                orient_passes[i] = cycle.passes
                orient_turns[i] = cycle.variant.turns

    palette_hues = np.asarray([COLOR_HUES[name] for name in COLOR_NAMES], dtype=np.float64)
    return PackedScene(count=k, frame_count=graph.frame_count, order=order,
                       motion_kind=motion_kind, base_xy=base_xy, switch_xy=switch_xy,
                       pos_passes=pos_passes, center_idx=center_idx, radius=radius,
                       gamma0=gamma0, dir_sign=dir_sign, scale0=scale0, scale1=scale1,
                       size_passes=size_passes, size0_code=size0_code, size1_code=size1_code,
                       hue0=hue0, hue_delta=hue_delta, color_passes=color_passes,
                       color0_idx=color0_idx, orient0=orient0, orient_turns=orient_turns,
                       orient_passes=orient_passes, palette_hues=palette_hues,
                       bound_factor=bound_factor)


@dataclass(frozen=True)
class TemporalScene:
    """A scene graph plus its evaluated per-frame state arrays."""

    graph: SceneGraph
    positions: np.ndarray     # (k, F, 2) ground-plane xy
    scales: np.ndarray        # (k, F); also the center height above ground
    orientations: np.ndarray  # (k, F) degrees, wrapped to [0, 360)
    hues: np.ndarray          # (k, F)
    size_codes: np.ndarray    # (k, F) int8: 0 small, 1 large, 2 transitional
    color_codes: np.ndarray   # (k, F) int8: palette index
    relations: "RelationTables | None" = None

    @property
    def frame_count(self) -> int:
        return self.graph.frame_count

    @property
    def count(self) -> int:
        return len(self.graph.objects)

    def index(self, object_id: str) -> int:
        return self.graph.index_of(object_id)

    def nominal_size(self, i: int, frame: int) -> str:
        return _NOMINAL_SIZES[self.size_codes[i, frame]]

    def nominal_color(self, i: int, frame: int) -> str:
        return COLOR_NAMES[self.color_codes[i, frame]]

    def state_at(self, frame: int, obj: int | str) -> ObjectState:
        i = obj if isinstance(obj, int) else self.index(obj)
        x, y = self.positions[i, frame]
        scale = float(self.scales[i, frame])
        return ObjectState(position=Vec3(float(x), float(y), scale),
                           orientation=float(self.orientations[i, frame]),
                           scale=scale,
                           color_hue=float(self.hues[i, frame]),
                           nominal_size=self.nominal_size(i, frame),
                           nominal_color=self.nominal_color(i, frame))

    def bound_radii(self) -> np.ndarray:
        """Per-frame xy bounding radius (scale times the shape's footprint factor)."""
        factors = np.asarray([obj.bound_factor() for obj in self.graph.objects])
        return self.scales * factors[:, None]


def materialize(graph: SceneGraph, *, backend=None) -> TemporalScene:
    """Evaluate all object states over the frame grid.

    Raises CyclicOrbitError on looping orbit references and KeyError on an
    unknown center id.
    """
    be = backend if backend is not None else backend_pkg.active
    packed = pack(graph)
    pos, scale, orient, hue, size_code, color_code = be.eval_states(packed)
    for arr in (pos, scale, orient, hue, size_code, color_code):
        arr.setflags(write=False)
    return TemporalScene(graph=graph, positions=pos, scales=scale,
                         orientations=orient, hues=hue,
                         size_codes=size_code, color_codes=color_code)
