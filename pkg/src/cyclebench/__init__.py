"""Deterministic benchmark generator for cyclical-scene video reasoning.

Scenes evolve over a fixed frame horizon through repeating cycles (linear
shuttling, orbits, size ramps, color sweeps, spins, light modulation) that
all return to their initial state; questions over those scenes come with
machine-checkable functional programs and exact answers.
"""

from __future__ import annotations

from .builder import BuildConfig, GenerationFailed, TIERS, build_scene
from .engine import TemporalScene, materialize, object_state_at
from .model import (
    CycleSpec,
    FunctionalProgram,
    ObjectSpec,
    QARecord,
    SceneGraph,
    Value,
    validate_graph,
)
from .pipeline import (
    BuildResult,
    VerifyReport,
    build_dataset,
    export_keyframes,
    verify_dataset,
)
from .questions import brute_force_answer, execute, generate_for_scene
from .scoring import score_captioning, score_vqa
from .serialize import scene_from_dict, scene_to_dict

__version__ = "0.1.0"

__all__ = [
    "BuildConfig",
    "BuildResult",
    "CycleSpec",
    "FunctionalProgram",
    "GenerationFailed",
    "ObjectSpec",
    "QARecord",
    "SceneGraph",
    "TIERS",
    "TemporalScene",
    "Value",
    "VerifyReport",
    "__version__",
    "brute_force_answer",
    "build_dataset",
    "build_scene",
    "execute",
    "export_keyframes",
    "generate_for_scene",
    "materialize",
    "object_state_at",
    "scene_from_dict",
    "scene_to_dict",
    "score_captioning",
    "score_vqa",
    "validate_graph",
    "verify_dataset",
]
