"""Palette math, spec validation, and graph-level invariants."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from cyclebench.model import (
    COLOR_HUES,
    COLOR_NAMES,
    CycleSpec,
    CyclicOrbitError,
    LinearMotion,
    ObjectSpec,
    Orbit,
    OrientationChange,
    SceneGraph,
    SizeChange,
    Vec3,
    circular_hue_distance,
    hue_arc,
    nearest_palette_color,
    orbit_order,
    validate_spec,
)


def make_object(oid="o0", **overrides):
    base = dict(id=oid, shape="sphere", material="rubber", size0="small",
                color0="red", position0=Vec3(0.0, 0.0, 0.0), orientation0=0.0)
    base.update(overrides)
    return ObjectSpec(**base)


def orbit_cycle(center_id, passes=1, radius=2.0, angle=0.0, direction="counterclockwise"):
    return CycleSpec(Orbit(center_id=center_id, radius=radius, initial_angle=angle,
                           direction=direction), passes * 32 / 160, passes)


class TestPalette:
    def test_every_palette_hue_maps_to_itself(self):
        for name in COLOR_NAMES:
            assert nearest_palette_color(COLOR_HUES[name]) == name

    def test_tie_resolves_to_lower_index(self):
        # 345 sits exactly between gray (330) and red (0=360); gray is listed first
        assert nearest_palette_color(345.0) == "gray"

    def test_near_miss_classification(self):
        assert nearest_palette_color(COLOR_HUES["blue"] + 1.0) == "blue"
        assert nearest_palette_color(359.0) == "red"

    def test_circular_distance_symmetry(self):
        assert circular_hue_distance(10.0, 350.0) == pytest.approx(20.0)
        assert circular_hue_distance(350.0, 10.0) == pytest.approx(20.0)

    def test_hue_arc_known_pairs(self):
        assert hue_arc(0.0, 230.0) == pytest.approx(-130.0)
        assert hue_arc(230.0, 0.0) == pytest.approx(130.0)
        # exact half-turn ties break toward increasing hue
        assert hue_arc(0.0, 180.0) == pytest.approx(180.0)

    @given(st.floats(0.0, 359.999), st.floats(0.0, 359.999))
    def test_hue_arc_is_shortest_and_lands_on_target(self, h0, h1):
        arc = hue_arc(h0, h1)
        assert -180.0 < arc <= 180.0
        assert circular_hue_distance((h0 + arc) % 360.0, h1) < 1e-6


class TestValidateSpec:
    def test_clean_spec_has_no_problems(self):
        assert validate_spec(make_object()) == []

    def test_bad_attribute_values_are_reported(self):
        spec = make_object(shape="prism")
        assert any("shape" in p for p in validate_spec(spec))
        spec = make_object(material="wood")
        assert any("material" in p for p in validate_spec(spec))
        spec = make_object(color0="magenta")
        assert any("color" in p for p in validate_spec(spec))

    def test_orientation_cycle_requires_orientable_shape(self):
        cycle = CycleSpec(OrientationChange(turns=1), 32 / 160, 1)
        spec = make_object(shape="sphere", cycles=(cycle,))
        assert any("orientation" in p for p in validate_spec(spec))
        spec = make_object(shape="cube", cycles=(cycle,))
        assert validate_spec(spec) == []

    def test_duplicate_property_cycles_are_reported(self):
        cycles = (CycleSpec(LinearMotion(Vec3(1.0, 1.0, 0.0)), 32 / 160, 1),
                  orbit_cycle("o1"))
        spec = make_object(cycles=cycles)
        assert any("position" in p for p in validate_spec(spec))

    def test_size_target_must_differ(self):
        cycle = CycleSpec(SizeChange(target="small"), 32 / 160, 1)
        spec = make_object(size0="small", cycles=(cycle,))
        assert any("size" in p for p in validate_spec(spec))

    def test_bad_pass_count_is_reported(self):
        cycle = CycleSpec(SizeChange(target="large"), 3 * 32 / 160, 3)
        spec = make_object(cycles=(cycle,))
        assert any("passes" in p for p in validate_spec(spec))


def make_graph(*objects):
    from cyclebench.model import Bounds, CameraConfig

    return SceneGraph(scene_id="t", tier="L1", seed=0, frame_count=160, fps=32,
                      bounds=Bounds(), camera=CameraConfig(
                          eye=Vec3(10.0, -9.0, 7.0), look_at=Vec3(0.0, 0.0, 0.0)),
                      lights=(), objects=tuple(objects))


class TestOrbitOrder:
    def test_topological_order_puts_centers_first(self):
        a = make_object("a", cycles=(orbit_cycle("b"),), position0=Vec3(2.0, 0.0, 0.0))
        b = make_object("b", cycles=(orbit_cycle("c"),), position0=Vec3(1.0, 0.0, 0.0))
        c = make_object("c", position0=Vec3(0.0, 0.0, 0.0))
        graph = make_graph(a, b, c)
        order = orbit_order(graph)
        assert order.index(2) < order.index(1) < order.index(0)

    def test_orbit_cycle_raises(self):
        a = make_object("a", cycles=(orbit_cycle("b"),))
        b = make_object("b", cycles=(orbit_cycle("a"),))
        with pytest.raises(CyclicOrbitError):
            orbit_order(make_graph(a, b))

    def test_missing_center_raises(self):
        a = make_object("a", cycles=(orbit_cycle("ghost"),))
        with pytest.raises(KeyError):
            orbit_order(make_graph(a))


class TestVec3:
    def test_json_roundtrip(self):
        v = Vec3(1.5, -2.25, 0.125)
        assert Vec3.from_json(v.to_json()) == v


class TestSceneGraphHelpers:
    def test_mesh_ref_derived_from_shape(self):
        assert make_object(shape="cone").mesh_ref == "mesh/cone"

    def test_period_frames_divides_horizon(self):
        for passes in (1, 2, 5):
            cycle = CycleSpec(SizeChange(target="large"), passes * 32 / 160, passes)
            assert cycle.period_frames(160) * passes == 160

    def test_duration_matches_frame_count_and_fps(self, desk_graphs):
        graph = next(iter(desk_graphs.values()))
        assert graph.duration_s == pytest.approx(graph.frame_count / graph.fps)
        assert graph.duration_s == pytest.approx(5.0)
