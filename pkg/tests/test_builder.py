"""Scene construction: determinism, margins, tier contracts, retry layering."""

from __future__ import annotations

import math

import numpy as np
import pytest

from cyclebench.builder import (
    TIERS,
    BuildConfig,
    GenerationFailed,
    allocate_cycles,
    build_scene,
    check_margins,
    pick_frequency,
)
from cyclebench.model import CHROMATIC_COLORS, CYCLE_PROPERTY, ORIENTABLE_SHAPES
from cyclebench.serialize import dumps_canonical, scene_to_dict


class TestDeterminism:
    def test_same_seed_same_scene(self):
        for tier in TIERS:
            a = build_scene(11, tier)
            b = build_scene(11, tier)
            assert a == b
            assert dumps_canonical(scene_to_dict(a)) == dumps_canonical(
                scene_to_dict(b))

    def test_different_seeds_differ(self):
        assert build_scene(1, "L1") != build_scene(2, "L1")


class TestTierContracts:
    def test_cyclic_and_clutter_counts(self, desk_graphs):
        for graph in desk_graphs.values():
            cyclic = [o for o in graph.objects if o.is_cyclic]
            clutter = [o for o in graph.objects if not o.is_cyclic]
            tier = graph.tier
            if tier == "L5":
                index = int(graph.scene_id.rsplit("_", 1)[1])
                contract = TIERS[f"L{1 + index % 4}"]
            else:
                contract = TIERS[tier]
            assert len(cyclic) == contract.n_cyclic, graph.scene_id
            lo, hi = contract.clutter_range
            assert lo <= len(clutter) <= hi, graph.scene_id

    def test_light_cycle_only_on_top_tier(self, desk_graphs):
        for graph in desk_graphs.values():
            modulated = any(light.modulation is not None for light in graph.lights)
            assert modulated == (graph.tier == "L5"), graph.scene_id

    def test_light_modulation_parameters(self, desk_graphs):
        for graph in desk_graphs.values():
            for light in graph.lights:
                if light.modulation is not None:
                    assert light.modulation.floor == 0.2
                    assert light.modulation.period_frames == graph.frame_count

    def test_top_tier_walks_all_compositions(self, desk_graphs):
        seen = set()
        for graph in desk_graphs.values():
            if graph.tier != "L5":
                continue
            index = int(graph.scene_id.rsplit("_", 1)[1])
            seen.add(f"L{1 + index % 4}")
        assert seen == {"L1", "L2", "L3", "L4"}


class TestObjectLegality:
    def test_orbit_centers_are_earlier_objects(self, desk_graphs):
        for graph in desk_graphs.values():
            ids = graph.object_ids()
            for i, obj in enumerate(graph.objects):
                orbit = obj.cycle_of("orbit")
                if orbit is not None:
                    assert ids.index(orbit.variant.center_id) < i

    def test_orbiter_starts_on_its_circle(self, desk_graphs):
        for graph in desk_graphs.values():
            for obj in graph.objects:
                orbit = obj.cycle_of("orbit")
                if orbit is None:
                    continue
                center = graph.object(orbit.variant.center_id)
                dx = obj.position0.x - center.position0.x
                dy = obj.position0.y - center.position0.y
                assert math.hypot(dx, dy) == pytest.approx(orbit.variant.radius,
                                                           abs=1e-9)

    def test_spinners_have_flat_faces(self, desk_graphs):
        for graph in desk_graphs.values():
            for obj in graph.objects:
                if obj.has_cycle("orientation_change"):
                    assert obj.shape in ORIENTABLE_SHAPES

    def test_color_cycles_connect_distinct_chromatic_colors(self, desk_graphs):
        for graph in desk_graphs.values():
            for obj in graph.objects:
                cycle = obj.cycle_of("color_change")
                if cycle is None:
                    continue
                assert obj.color0 in CHROMATIC_COLORS
                assert cycle.variant.target in CHROMATIC_COLORS
                assert cycle.variant.target != obj.color0

    def test_no_object_carries_conflicting_cycles(self, desk_graphs):
        for graph in desk_graphs.values():
            for obj in graph.objects:
                properties = [CYCLE_PROPERTY[c.kind] for c in obj.cycles]
                assert len(properties) == len(set(properties))


class TestMargins:
    def test_kernel_scan_clean_on_built_scenes(self, desk_graphs):
        config = BuildConfig()
        for graph in desk_graphs.values():
            violation = check_margins(list(graph.objects), config)
            assert violation[0] == -1, graph.scene_id


class TestAllocateCycles:
    def test_no_slot_gets_conflicting_kinds(self):
        rng = np.random.default_rng(0)
        kinds = list(CYCLE_PROPERTY)
        for _ in range(200):
            pool = [kinds[int(rng.integers(len(kinds)))]
                    for _ in range(int(rng.integers(1, 5)))]
            slots = allocate_cycles(rng, pool, 3)
            if slots is None:
                continue
            for slot in slots:
                properties = [CYCLE_PROPERTY[k] for k in slot]
                assert len(properties) == len(set(properties))

    def test_require_all_used_fills_every_slot(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            slots = allocate_cycles(rng, ["orbit", "size_change", "color_change"],
                                    3, require_all_used=True)
            assert slots is not None
            assert all(slot for slot in slots)

    def test_unsatisfiable_pool_returns_none(self):
        rng = np.random.default_rng(2)
        # two position-driving cycles cannot share the single slot
        assert allocate_cycles(rng, ["orbit", "linear_motion"], 1) is None


class TestFrequencies:
    def test_relationship_between_passes_and_frequency(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            frequency_hz, passes = pick_frequency(rng, 160, 32)
            assert passes in (1, 2, 5)
            assert frequency_hz == pytest.approx(passes * 32 / 160)

    def test_pass_counts_roughly_uniform(self):
        rng = np.random.default_rng(4)
        counts = {1: 0, 2: 0, 5: 0}
        n = 3000
        for _ in range(n):
            _, passes = pick_frequency(rng, 160, 32)
            counts[passes] += 1
        for v in counts.values():
            assert abs(v - n / 3) < 4 * math.sqrt(n / 3)


class TestFailure:
    def test_impossible_config_raises_with_seed(self):
        from cyclebench.model import Bounds

        config = BuildConfig(bounds=Bounds(x=(-1.0, 1.0), y=(-1.0, 1.0)),
                             object_margin=2.0, boundary_margin=0.25,
                             property_resample_max=2, object_regen_max=2,
                             global_backtrack_max=10)
        with pytest.raises(GenerationFailed) as excinfo:
            build_scene(5, "L2", config)
        assert excinfo.value.seed == 5
        assert excinfo.value.tier == "L2"

    def test_unknown_tier_rejected(self):
        with pytest.raises(ValueError):
            build_scene(0, "L9")
