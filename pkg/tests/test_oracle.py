"""The independent scalar oracle must reproduce every evaluator answer."""

from __future__ import annotations

import numpy as np

from cyclebench.model import ColorChange, LinearMotion, Orbit, SizeChange, Vec3
from cyclebench.questions import brute_force_answer, execute, generate_for_scene
from cyclebench.questions.oracle import run_program
from tests.test_model import make_graph, make_object
from tests.test_questions import cyc, program


def oracle(graph, *steps):
    return run_program(program(*steps), graph)


class TestOracleStandalone:
    def test_counts_and_periods_from_graph_alone(self):
        a = make_object("a", position0=Vec3(-3.0, 0.0, 0.0),
                        cycles=(cyc(LinearMotion(Vec3(-3.0, 2.0, 0.0)), 2),))
        b = make_object("b", shape="cube", color0="blue",
                        position0=Vec3(3.0, 0.0, 0.0))
        graph = make_graph(a, b)
        count = oracle(graph, ("scene", (), ()), ("filter_moving", (), (0,)),
                       ("count", (), (1,)))
        assert count.data == 1
        period = oracle(graph, ("scene", (), ()),
                        ("filter_linear_motion", (), (0,)),
                        ("unique", (), (1,)),
                        ("query_linear_motion_period", (), (2,)))
        assert period.data == 80
        passes = oracle(graph, ("scene", (), ()),
                        ("filter_linear_motion", (), (0,)),
                        ("unique", (), (1,)),
                        ("query_linear_motion_passes", (), (2,)))
        assert passes.data == 2

    def test_orbit_center_query_chains(self):
        hub = make_object("hub", shape="cube", color0="yellow",
                          position0=Vec3(0.0, 0.0, 0.0))
        rider = make_object(
            "rider", position0=Vec3(2.0, 0.0, 0.0),
            cycles=(cyc(Orbit(center_id="hub", radius=2.0, initial_angle=0.0,
                              direction="clockwise"), 1),))
        graph = make_graph(hub, rider)
        center_color = oracle(graph, ("scene", (), ()),
                              ("filter_orbit", (), (0,)),
                              ("unique", (), (1,)),
                              ("query_orbit_center", (), (2,)),
                              ("query_color", (), (3,)))
        assert center_color.data == "yellow"
        direction = oracle(graph, ("scene", (), ()),
                           ("filter_orbit", (), (0,)),
                           ("unique", (), (1,)),
                           ("query_orbit_direction", (), (2,)))
        assert direction.data == "clockwise"

    def test_transitional_color_membership(self):
        sweep = make_object("s", color0="blue",
                            cycles=(cyc(ColorChange(target="green"), 1),))
        graph = make_graph(sweep)
        ever_cyan = oracle(graph, ("scene", (), ()),
                           ("filter_color_ever", ("cyan",), (0,)),
                           ("exist", (), (1,)))
        always_blue = oracle(graph, ("scene", (), ()),
                             ("filter_color_always", ("blue",), (0,)),
                             ("exist", (), (1,)))
        assert ever_cyan.data is True
        assert always_blue.data is False

    def test_size_comparison_across_cycles(self):
        grower = make_object("g", position0=Vec3(-3.0, 0.0, 0.0),
                             cycles=(cyc(SizeChange(target="large"), 1),))
        big = make_object("b", size0="large", position0=Vec3(3.0, 0.0, 0.0))
        graph = make_graph(grower, big)
        ever = oracle(graph, ("scene", (), ()),
                      ("filter_size_change", (), (0,)), ("unique", (), (1,)),
                      ("scene", (), ()),
                      ("filter_size_always", ("large",), (3,)),
                      ("unique", (), (4,)),
                      ("equal_size_ever", (), (2, 5)))
        always = oracle(graph, ("scene", (), ()),
                        ("filter_size_change", (), (0,)), ("unique", (), (1,)),
                        ("scene", (), ()),
                        ("filter_size_always", ("large",), (3,)),
                        ("unique", (), (4,)),
                        ("equal_size_always", (), (2, 5)))
        assert ever.data is True
        assert always.data is False


class TestOracleAgreesWithEvaluator:
    def test_sampled_scenes_full_agreement(self, desk_graphs, desk_temporals):
        rng = np.random.default_rng(1234)
        checked = 0
        for scene_id in list(desk_graphs)[::11]:
            temporal = desk_temporals[scene_id]
            for record in generate_for_scene(temporal, rng, rounds=2):
                fast = execute(record.program, temporal)
                slow = brute_force_answer(record, temporal)
                assert fast.to_json() == slow.to_json(), record.question_id
                checked += 1
        assert checked > 100
