"""Shared fixtures: one small dataset built once per session."""

from __future__ import annotations

import json
import os

import pytest

from cyclebench.pipeline import BuildResult, build_dataset
from cyclebench.serialize import scene_from_dict

DESK_SEED = 20260819
DESK_SCENES_PER_TIER = 20


@pytest.fixture(scope="session")
def desk(tmp_path_factory) -> BuildResult:
    out = tmp_path_factory.mktemp("desk")
    return build_dataset(str(out), DESK_SEED,
                         scenes_per_tier=DESK_SCENES_PER_TIER,
                         proportional=False)


@pytest.fixture(scope="session")
def desk_graphs(desk):
    graphs = {}
    scenes_dir = os.path.join(desk.out_dir, "scenes")
    for name in sorted(os.listdir(scenes_dir)):
        with open(os.path.join(scenes_dir, name), encoding="utf-8") as fh:
            graph = scene_from_dict(json.load(fh))
        graphs[graph.scene_id] = graph
    return graphs


@pytest.fixture(scope="session")
def desk_temporals(desk_graphs):
    from cyclebench.engine import materialize

    return {scene_id: materialize(graph)
            for scene_id, graph in desk_graphs.items()}
