"""Randomized scene construction under hard margin constraints.

Objects are placed sequentially, clutter first, cyclic objects after, so an
orbiting object always has earlier-placed candidates for its center and the
center graph is acyclic by construction. Every placement is validated over
the full frame horizon with the kernel margin scan. Recovery is layered:
resample the offending property (bounded), regenerate the object (bounded),
backtrack to the previous object (bounded globally), then fail the seed.

All randomness flows through named Philox substreams derived from the scene
seed, so a rebuilt seed reproduces the scene bit for bit regardless of how
many retries earlier seeds consumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend as backend_pkg
from .engine import materialize
from .model import (
    ALLOWED_PASSES,
    CHROMATIC_COLORS,
    COLOR_NAMES,
    CYCLE_KINDS,
    CYCLE_PROPERTY,
    FPS_DEFAULT,
    FRAME_COUNT_DEFAULT,
    MATERIALS,
    ORIENTABLE_SHAPES,
    ORBIT_RADIUS_MAX,
    ORBIT_RADIUS_MIN,
    SHAPES,
    SIZE_SCALE,
    SIZES,
    Bounds,
    CameraConfig,
    ColorChange,
    CycleSpec,
    LightConfig,
    LinearMotion,
    Modulation,
    ObjectSpec,
    Orbit,
    OrientationChange,
    SceneGraph,
    SizeChange,
    Vec3,
)

# substream tags
_PLAN, _OBJECT, _CAMERA, _LIGHT = 0, 1, 2, 3


class GenerationFailed(Exception):
    """A seed exhausted its retry budget; the caller should move to a new seed."""

    def __init__(self, seed: int, tier: str, message: str):
        super().__init__(f"seed {seed} ({tier}): {message}")
        self.seed = seed
        self.tier = tier


@dataclass(frozen=True)
class BuildConfig:
    frame_count: int = FRAME_COUNT_DEFAULT
    fps: int = FPS_DEFAULT
    bounds: Bounds = Bounds()
    object_margin: float = 0.4
    boundary_margin: float = 0.25
    extra_cycle_prob: float = 0.25
    property_resample_max: int = 10
    object_regen_max: int = 10
    global_backtrack_max: int = 100
    light_floor: float = 0.2


@dataclass(frozen=True)
class TierConfig:
    name: str
    n_cyclic: int
    clutter_range: tuple[int, int]
    light_cycle: bool = False


TIERS: dict[str, TierConfig] = {
    "L1": TierConfig("L1", 1, (2, 3)),
    "L2": TierConfig("L2", 1, (4, 9)),
    "L3": TierConfig("L3", 2, (2, 3)),
    "L4": TierConfig("L4", 3, (2, 3)),
    # L5 reuses the lower-tier compositions with the light cycle switched on
    "L5": TierConfig("L5", 0, (0, 0), light_cycle=True),
}

TIER_NAMES = tuple(TIERS)

_CAMERA_EYE = Vec3(10.47, -9.11, 7.48)
_LIGHT_BASES = (
    ("key", Vec3(4.45, -4.42, 6.0), 800.0),
    ("fill", Vec3(-4.67, -4.03, 3.01), 300.0),
    ("back", Vec3(-1.07, 5.91, 5.0), 400.0),
)


def _stream(seed: int, tier_tag: int, *tags: int) -> np.random.Generator:
    entropy = (seed, tier_tag) + tags
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _pick(rng: np.random.Generator, items):
    return items[int(rng.integers(len(items)))]


def pick_frequency(rng: np.random.Generator, frame_count: int,
                   fps: int = FPS_DEFAULT) -> tuple[float, int]:
    """Uniformly choose a cycle pass count and return (frequency_hz, passes)."""
    passes = int(_pick(rng, ALLOWED_PASSES))
    return passes * fps / frame_count, passes


def allocate_cycles(rng: np.random.Generator, pool: list[str], candidates: int,
                    require_all_used: bool = False,
                    attempts: int = 50) -> list[list[str]] | None:
    """Assign cycle kinds from the pool to candidate slots.

    No slot may receive two cycles driving the same object property. With
    require_all_used, every slot must end up with at least one cycle.
    Returns None as a backtrack signal when no legal assignment was found.
    """
    for _ in range(attempts):
        slots: list[list[str]] = [[] for _ in range(candidates)]
        ok = True
        for kind in pool:
            legal = [i for i in range(candidates)
                     if all(CYCLE_PROPERTY[kind] != CYCLE_PROPERTY[have]
                            for have in slots[i])]
            if not legal:
                ok = False
                break
            slots[_pick(rng, legal)].append(kind)
        if not ok:
            continue
        if require_all_used and any(not slot for slot in slots):
            continue
        return slots
    return None


def _sample_camera(rng: np.random.Generator) -> CameraConfig:
    jitter = rng.uniform(-0.5, 0.5, size=3)
    eye = Vec3(_CAMERA_EYE.x + float(jitter[0]),
               _CAMERA_EYE.y + float(jitter[1]),
               _CAMERA_EYE.z + float(jitter[2]))
    return CameraConfig(eye=eye, look_at=Vec3(0.0, 0.0, 0.0))


def _sample_lights(rng: np.random.Generator, modulated: bool,
                   config: BuildConfig) -> tuple[LightConfig, ...]:
    lights = []
    for name, base, intensity in _LIGHT_BASES:
        jitter = rng.uniform(-0.5, 0.5, size=3)
        position = Vec3(base.x + float(jitter[0]), base.y + float(jitter[1]),
                        base.z + float(jitter[2]))
        modulation = (Modulation(config.light_floor, config.frame_count)
                      if modulated else None)
        lights.append(LightConfig(name=name, position=position,
                                  intensity=intensity, modulation=modulation))
    return tuple(lights)


def _max_scale(size0: str, kinds: list[str]) -> float:
    if "size_change" in kinds:
        return max(SIZE_SCALE.values())
    return SIZE_SCALE[size0]


def _axis_sample(rng: np.random.Generator, lo: float, hi: float) -> float:
    # an infeasible interval collapses to its midpoint; the margin scan then
    # rejects the placement and the normal retry ladder takes over
    if lo >= hi:
        return (lo + hi) / 2.0
    return float(rng.uniform(lo, hi))


def _sample_position(rng: np.random.Generator, bounds: Bounds,
                     boundary_margin: float, reach: float) -> Vec3:
    x = _axis_sample(rng, bounds.x[0] + boundary_margin + reach,
                     bounds.x[1] - boundary_margin - reach)
    y = _axis_sample(rng, bounds.y[0] + boundary_margin + reach,
                     bounds.y[1] - boundary_margin - reach)
    return Vec3(x, y, 0.0)


def _sample_orbit(rng: np.random.Generator, placed: list[ObjectSpec],
                  frequency_hz: float, passes: int) -> tuple[CycleSpec, Vec3]:
    center = _pick(rng, placed)
    radius = float(rng.uniform(ORBIT_RADIUS_MIN, ORBIT_RADIUS_MAX))
    gamma0 = float(rng.uniform(0.0, 360.0))
    direction = _pick(rng, ("clockwise", "counterclockwise"))
    variant = Orbit(center_id=center.id, radius=radius, initial_angle=gamma0,
                    direction=direction)
    rad = gamma0 * math.pi / 180.0
    position0 = Vec3(center.position0.x + radius * math.cos(rad),
                     center.position0.y + radius * math.sin(rad), 0.0)
    return CycleSpec(variant=variant, frequency_hz=frequency_hz, passes=passes), position0


def _sample_object(rng: np.random.Generator, oid: str, kinds: list[str],
                   placed: list[ObjectSpec], config: BuildConfig) -> ObjectSpec | None:
    if "orientation_change" in kinds:
        shape = _pick(rng, ORIENTABLE_SHAPES)
    else:
        shape = _pick(rng, SHAPES)
    material = _pick(rng, MATERIALS)
    size0 = _pick(rng, SIZES)
    color0 = _pick(rng, CHROMATIC_COLORS if "color_change" in kinds else COLOR_NAMES)
    orientation0 = float(rng.uniform(0.0, 360.0))

    reach = _max_scale(size0, kinds) * (math.sqrt(2.0) if shape == "cube" else 1.0)
    position0 = _sample_position(rng, config.bounds, config.boundary_margin, reach)

    cycles: list[CycleSpec] = []
    ordered = sorted(kinds, key=CYCLE_KINDS.index)
    for kind in ordered:
        frequency_hz, passes = pick_frequency(rng, config.frame_count, config.fps)
        if kind == "linear_motion":
            switch = _sample_position(rng, config.bounds, config.boundary_margin, reach)
            cycles.append(CycleSpec(LinearMotion(switch_point=switch),
                                    frequency_hz, passes))
        elif kind == "orbit":
            if not placed:
                return None
            cycle, position0 = _sample_orbit(rng, placed, frequency_hz, passes)
            cycles.append(cycle)
        elif kind == "size_change":
            target = "large" if size0 == "small" else "small"
            cycles.append(CycleSpec(SizeChange(target=target), frequency_hz, passes))
        elif kind == "color_change":
            target = _pick(rng, tuple(c for c in CHROMATIC_COLORS if c != color0))
            cycles.append(CycleSpec(ColorChange(target=target), frequency_hz, passes))
        elif kind == "orientation_change":
            cycles.append(CycleSpec(OrientationChange(turns=1), frequency_hz, passes))

    return ObjectSpec(id=oid, shape=shape, material=material, size0=size0,
                      color0=color0, position0=position0, orientation0=orientation0,
                      cycles=tuple(cycles))


def _resample_placement(rng: np.random.Generator, spec: ObjectSpec,
                        placed: list[ObjectSpec],
                        config: BuildConfig) -> ObjectSpec | None:
    """Redraw only the geometry that caused a margin violation."""
    kinds = [c.kind for c in spec.cycles]
    reach = _max_scale(spec.size0, kinds) * (math.sqrt(2.0) if spec.shape == "cube" else 1.0)

    if "orbit" in kinds:
        if not placed:
            return None
        frequency_hz = spec.cycle_of("orbit").frequency_hz
        passes = spec.cycle_of("orbit").passes
        cycle, position0 = _sample_orbit(rng, placed, frequency_hz, passes)
        cycles = tuple(cycle if c.kind == "orbit" else c for c in spec.cycles)
        return ObjectSpec(id=spec.id, shape=spec.shape, material=spec.material,
                          size0=spec.size0, color0=spec.color0, position0=position0,
                          orientation0=spec.orientation0, cycles=cycles)

    position0 = _sample_position(rng, config.bounds, config.boundary_margin, reach)
    cycles = spec.cycles
    if "linear_motion" in kinds:
        switch = _sample_position(rng, config.bounds, config.boundary_margin, reach)
        cycles = tuple(CycleSpec(LinearMotion(switch_point=switch),
                                 c.frequency_hz, c.passes)
                       if c.kind == "linear_motion" else c
                       for c in spec.cycles)
    return ObjectSpec(id=spec.id, shape=spec.shape, material=spec.material,
                      size0=spec.size0, color0=spec.color0, position0=position0,
                      orientation0=spec.orientation0, cycles=cycles)


def _partial_graph(specs: list[ObjectSpec], config: BuildConfig) -> SceneGraph:
    camera = CameraConfig(eye=_CAMERA_EYE, look_at=Vec3(0.0, 0.0, 0.0))
    return SceneGraph(scene_id="partial", tier="partial", seed=0,
                      frame_count=config.frame_count, fps=config.fps,
                      bounds=config.bounds, camera=camera, lights=(),
                      objects=tuple(specs))


def check_margins(specs: list[ObjectSpec], config: BuildConfig,
                  focus: int = -1, backend=None) -> np.ndarray:
    """Full-horizon margin scan over a (possibly partial) object list.

    Returns the kernel violation triple [frame, i, j]; frame < 0 means clean.
    """
    be = backend if backend is not None else backend_pkg.active
    temporal = materialize(_partial_graph(specs, config), backend=be)
    rb = temporal.bound_radii()
    return be.margin_scan(temporal.positions, rb, config.bounds.x, config.bounds.y,
                          config.object_margin, config.boundary_margin, focus)


def _try_place(seed: int, tier_tag: int, slot: int, epoch: int, kinds: list[str],
               placed: list[ObjectSpec], config: BuildConfig) -> ObjectSpec | None:
    for regen in range(config.object_regen_max):
        rng = _stream(seed, tier_tag, _OBJECT, slot, epoch, regen)
        spec = _sample_object(rng, f"o{slot}", kinds, placed, config)
        if spec is None:
            return None
        violation = check_margins(placed + [spec], config, focus=len(placed))
        if violation[0] < 0:
            return spec
        for _ in range(config.property_resample_max):
            candidate = _resample_placement(rng, spec, placed, config)
            if candidate is None:
                break
            spec = candidate
            violation = check_margins(placed + [spec], config, focus=len(placed))
            if violation[0] < 0:
                return spec
    return None


def build_scene(seed: int, tier: str, config: BuildConfig = BuildConfig(), *,
                scene_id: str = "", composition: str | None = None) -> SceneGraph:
    """Build one scene deterministically from its seed.

    For the light-cycle tier, `composition` names which lower tier's object
    mix to use (defaults to a seed-derived choice); other tiers use their own.
    """
    if tier not in TIERS:
        raise ValueError(f"unknown tier {tier!r}")
    tier_cfg = TIERS[tier]
    if tier == "L5":
        comp = TIERS[composition or f"L{1 + seed % 4}"]
    else:
        comp = tier_cfg

    tier_tag = TIER_NAMES.index(tier)
    # hard plans (dense clutter draws) get abandoned for a fresh plan before
    # they can burn the whole global budget
    plan_budget = max(1, config.global_backtrack_max // 4)
    backtracks = 0
    for plan_round in range(config.global_backtrack_max + 1):
        plan_rng = _stream(seed, tier_tag, _PLAN, plan_round)
        clutter_n = int(plan_rng.integers(comp.clutter_range[0],
                                          comp.clutter_range[1] + 1))
        n_cyclic = comp.n_cyclic

        partition: list[list[str]] | None = None
        for _ in range(50):
            pool_size = n_cyclic
            if n_cyclic and plan_rng.random() < config.extra_cycle_prob:
                pool_size += 1
            pool = [_pick(plan_rng, CYCLE_KINDS) for _ in range(pool_size)]
            partition = allocate_cycles(plan_rng, pool, n_cyclic,
                                        require_all_used=True)
            if partition is not None:
                break
        if partition is None:
            raise GenerationFailed(seed, tier, "no conflict-free cycle assignment")

        kinds_by_slot: list[list[str]] = [[] for _ in range(clutter_n)] + partition
        total = clutter_n + n_cyclic
        camera = _sample_camera(_stream(seed, tier_tag, _CAMERA, plan_round))
        lights = _sample_lights(_stream(seed, tier_tag, _LIGHT, plan_round),
                                tier_cfg.light_cycle, config)

        placed: list[ObjectSpec] = []
        visit = [0] * total
        i = 0
        plan_backtracks = 0
        replan = False
        while i < total:
            spec = _try_place(seed, tier_tag, i, visit[i], kinds_by_slot[i],
                              placed, config)
            if spec is not None:
                placed.append(spec)
                i += 1
                continue
            backtracks += 1
            plan_backtracks += 1
            if backtracks > config.global_backtrack_max:
                raise GenerationFailed(seed, tier, "backtrack budget exhausted")
            if i == 0 or plan_backtracks > plan_budget:
                replan = True
                break
            placed.pop()
            i -= 1
            visit[i] += 1
        if replan:
            continue

        graph = SceneGraph(scene_id=scene_id or f"{tier}_{seed}", tier=tier,
                           seed=seed, frame_count=config.frame_count, fps=config.fps,
                           bounds=config.bounds, camera=camera, lights=lights,
                           objects=tuple(placed))
        final = check_margins(list(placed), config, focus=-1)
        if final[0] >= 0:
            raise AssertionError(f"final margin scan found a violation: {final}")
        return graph

    raise GenerationFailed(seed, tier, "plan budget exhausted")
