"""Temporal evolution: exact cycle shapes and the return-to-start invariant."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyclebench.engine import (
    eval_color,
    eval_light,
    eval_linear,
    eval_orbit,
    eval_orientation,
    eval_size,
    materialize,
    object_state_at,
    triangle_phase,
)
from cyclebench.model import (
    CHROMATIC_COLORS,
    COLOR_HUES,
    SIZE_SCALE,
    ColorChange,
    CycleSpec,
    LinearMotion,
    Orbit,
    OrientationChange,
    SizeChange,
    Vec3,
)
from tests.test_model import make_graph, make_object

F = 160
FPS = 32


def cyc(variant, passes):
    return CycleSpec(variant, passes * FPS / F, passes)


class TestTriangle:
    def test_shape(self):
        assert triangle_phase(0.0) == 0.0
        assert triangle_phase(0.25) == 0.5
        assert triangle_phase(0.5) == 1.0
        assert triangle_phase(0.75) == 0.5

    def test_linear_motion_hits_switch_point_at_half_cycle(self):
        p0 = Vec3(-1.0, 0.0, 0.0)
        sw = Vec3(1.0, 2.0, 0.0)
        for passes in (1, 2, 5):
            freq = passes * FPS / F
            period = F // passes
            half = period // 2
            at = lambda f: eval_linear(p0, sw, freq, f / FPS)
            start = at(0)
            assert (start.x, start.y) == pytest.approx((p0.x, p0.y), abs=1e-12)
            mid = at(half)
            assert (mid.x, mid.y) == pytest.approx((sw.x, sw.y), abs=1e-9)
            quarter = at(half // 2) if half % 2 == 0 else None
            if quarter is not None:
                assert (quarter.x, quarter.y) == pytest.approx(
                    ((p0.x + sw.x) / 2, (p0.y + sw.y) / 2), abs=1e-9)
            end = at(period)
            assert (end.x, end.y) == pytest.approx((p0.x, p0.y), abs=1e-9)


class TestOrbit:
    def test_counterclockwise_quarter_turn(self):
        center = Vec3(1.0, 1.0, 0.0)
        pos = eval_orbit(center, 2.0, 0.0, "counterclockwise", FPS / F, 40 / FPS)
        assert (pos.x, pos.y) == pytest.approx((1.0, 3.0), abs=1e-9)

    def test_clockwise_mirrors(self):
        center = Vec3(0.0, 0.0, 0.0)
        ccw = eval_orbit(center, 2.0, 30.0, "counterclockwise", FPS / F, 40 / FPS)
        cw = eval_orbit(center, 2.0, 30.0, "clockwise", FPS / F, 40 / FPS)
        assert ccw.x == pytest.approx(math.cos(math.radians(120.0)) * 2.0, abs=1e-9)
        assert cw.x == pytest.approx(math.cos(math.radians(-60.0)) * 2.0, abs=1e-9)


class TestSize:
    def test_ramp_and_nominal_labels(self):
        scale0, label0 = eval_size("small", "large", FPS / F, 0.0)
        assert scale0 == SIZE_SCALE["small"] and label0 == "small"
        half, label_half = eval_size("small", "large", FPS / F, 80 / FPS)
        assert half == SIZE_SCALE["large"] and label_half == "large"
        quarter, label_quarter = eval_size("small", "large", FPS / F, 40 / FPS)
        assert quarter == pytest.approx(0.525, abs=1e-12)
        assert label_quarter == "transitional"


class TestColor:
    def test_hue_travels_the_shorter_arc(self):
        hue0 = COLOR_HUES["red"]
        hue1 = COLOR_HUES["blue"]
        mid = eval_color(hue0, hue1, FPS / F, 40 / FPS)
        # red 0 -> blue 230 goes backwards through 295, never through 115
        assert mid == pytest.approx((0.0 - 65.0) % 360.0, abs=1e-9)


class TestOrientation:
    def test_single_turn(self):
        assert eval_orientation(10.0, 1, FPS / F, 40 / FPS) == pytest.approx(100.0)
        assert eval_orientation(10.0, 1, FPS / F, 160 / FPS) == pytest.approx(10.0)


class TestLight:
    def test_cosine_modulation_endpoints(self):
        assert eval_light(800.0, 0.2, F, 0) == pytest.approx(800.0)
        assert eval_light(800.0, 0.2, F, 80) == pytest.approx(160.0)
        assert eval_light(800.0, 0.2, F, 40) == pytest.approx(800.0 * 0.6)


def random_cyclic_object(rng, kinds):
    cycles = []
    passes = int(rng.choice((1, 2, 5)))
    if "linear_motion" in kinds:
        cycles.append(cyc(LinearMotion(Vec3(float(rng.uniform(-3, 3)),
                                            float(rng.uniform(-3, 3)), 0.0)), passes))
    if "size_change" in kinds:
        cycles.append(cyc(SizeChange(target="large"), passes))
    if "color_change" in kinds:
        target = str(rng.choice([c for c in CHROMATIC_COLORS if c != "red"]))
        cycles.append(cyc(ColorChange(target=target), passes))
    if "orientation_change" in kinds:
        cycles.append(cyc(OrientationChange(turns=1), passes))
    shape = "cube" if "orientation_change" in kinds else "sphere"
    return make_object("o0", shape=shape, cycles=tuple(cycles),
                       position0=Vec3(float(rng.uniform(-2, 2)),
                                      float(rng.uniform(-2, 2)), 0.0),
                       orientation0=float(rng.uniform(0, 360)))


class TestPeriodicity:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000), st.sampled_from([
        ("linear_motion",), ("size_change",), ("color_change",),
        ("orientation_change",), ("linear_motion", "size_change", "color_change"),
    ]))
    def test_every_cycle_returns_to_start(self, seed, kinds):
        rng = np.random.default_rng(seed)
        obj = random_cyclic_object(rng, kinds)
        graph = make_graph(obj)
        start = object_state_at(graph, "o0", 0.0)
        passes = obj.cycles[0].passes
        for lap in range(1, passes + 1):
            t = lap * (F / passes) / FPS
            state = object_state_at(graph, "o0", t)
            assert state.position.x == pytest.approx(start.position.x, abs=1e-9)
            assert state.position.y == pytest.approx(start.position.y, abs=1e-9)
            assert state.scale == pytest.approx(start.scale, abs=1e-9)
            assert state.color_hue == pytest.approx(start.color_hue, abs=1e-9)
            assert math.isclose((state.orientation - start.orientation) % 360.0 % 360.0,
                                0.0, abs_tol=1e-6) or math.isclose(
                (state.orientation - start.orientation) % 360.0, 360.0, abs_tol=1e-6)

    def test_orbit_returns_to_start(self):
        center = make_object("c", position0=Vec3(0.0, 0.0, 0.0))
        for passes in (1, 2, 5):
            orbiter = make_object(
                "a", position0=Vec3(2.0, 0.0, 0.0),
                cycles=(cyc(Orbit(center_id="c", radius=2.0, initial_angle=0.0,
                                  direction="counterclockwise"), passes),))
            graph = make_graph(center, orbiter)
            temporal = materialize(graph)
            idx = temporal.index("a")
            assert temporal.positions[idx, 0] == pytest.approx([2.0, 0.0], abs=1e-12)
            period = F // passes
            for lap_frame in range(0, F, period):
                assert temporal.positions[idx, lap_frame] == pytest.approx(
                    [2.0, 0.0], abs=1e-9)


class TestMaterialize:
    def test_arrays_are_frozen(self, desk_temporals):
        temporal = next(iter(desk_temporals.values()))
        assert not temporal.positions.flags.writeable
        assert not temporal.scales.flags.writeable
        with pytest.raises(ValueError):
            temporal.positions[0, 0, 0] = 99.0

    def test_scalar_and_array_paths_agree(self, desk_graphs, desk_temporals):
        for scene_id in list(desk_graphs)[::17]:
            graph = desk_graphs[scene_id]
            temporal = desk_temporals[scene_id]
            for f in (0, 7, 80, 159):
                t = f / graph.fps
                for i, oid in enumerate(graph.object_ids()):
                    state = object_state_at(graph, oid, t)
                    assert state.position.x == pytest.approx(
                        float(temporal.positions[i, f, 0]), abs=1e-9)
                    assert state.position.y == pytest.approx(
                        float(temporal.positions[i, f, 1]), abs=1e-9)
                    assert state.scale == pytest.approx(
                        float(temporal.scales[i, f]), abs=1e-9)
                    assert state.position.z == pytest.approx(state.scale, abs=1e-12)

    def test_ground_contact(self, desk_temporals):
        temporal = next(iter(desk_temporals.values()))
        state = temporal.state_at(0, 0)
        assert state.position.z == state.scale
