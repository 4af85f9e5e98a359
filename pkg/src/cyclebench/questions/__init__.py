"""Question machinery: program evaluator, templates, and the brute-force oracle."""

from .program import REGISTRY, execute, validate
from .templates import TEMPLATES, balance_yes_no, generate_for_scene, instantiate
from .oracle import brute_force_answer

__all__ = [
    "REGISTRY",
    "execute",
    "validate",
    "TEMPLATES",
    "balance_yes_no",
    "generate_for_scene",
    "instantiate",
    "brute_force_answer",
]
