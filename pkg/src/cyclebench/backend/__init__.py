"""Kernel backend selection.

The compiled extension is preferred when importable; set
CYCLEBENCH_BACKEND=python or =compiled to force a choice. Both backends
expose eval_states, margin_scan, and relation_table with identical
signatures and agree on results.
"""

from __future__ import annotations

import os

from . import numpy_impl

BACKEND_ENV = "CYCLEBENCH_BACKEND"


def _compiled():
    from . import _core

    return _core


def get_backend(name: str):
    """Resolve a backend by name: 'compiled' or 'python'."""
    if name == "python":
        return numpy_impl
    if name == "compiled":
        return _compiled()
    raise ValueError(f"unknown backend {name!r}; use 'compiled' or 'python'")


def _select():
    requested = os.environ.get(BACKEND_ENV, "").strip()
    if requested:
        return get_backend(requested)
    try:
        return _compiled()
    except ImportError:
        return numpy_impl


active = _select()
NAME: str = active.BACKEND_NAME
