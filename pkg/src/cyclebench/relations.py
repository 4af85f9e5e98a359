"""Frame-indexed spatial relations from the camera's point of view.

Relations are computed in screen space via the camera's ground-plane basis:
a is "left" of b when the displacement a-b projects negatively onto the
camera's right vector, "front" when it projects negatively onto the forward
vector (closer to the camera). Projections inside a small dead zone hold no
relation at all, so near-ties are neither left nor right.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from . import backend as backend_pkg
from .engine import TemporalScene
from .model import CameraConfig, Vec3

RELATIONS = ("left", "right", "front", "behind")
RELATION_BITS: Mapping[str, int] = {"left": 1, "right": 2, "front": 4, "behind": 8}
DEAD_ZONE = 1e-6


def relation_at(positions: Mapping[str, Vec3], camera: CameraConfig,
                a: str, b: str, relation: str) -> bool:
    """Scalar reference: does relation(a, b) hold for one frame's positions?"""
    if relation not in RELATION_BITS:
        raise ValueError(f"unknown relation {relation!r}")
    pa = positions[a]
    pb = positions[b]
    dx = pa.x - pb.x
    dy = pa.y - pb.y
    if relation in ("left", "right"):
        proj = dx * camera.right[0] + dy * camera.right[1]
        return proj < -DEAD_ZONE if relation == "left" else proj > DEAD_ZONE
    proj = dx * camera.forward[0] + dy * camera.forward[1]
    return proj < -DEAD_ZONE if relation == "front" else proj > DEAD_ZONE


@dataclass(frozen=True)
class RelationTrack:
    relation: str
    subject_id: str
    object_id: str
    frames: np.ndarray  # (F,) bool
    ever: bool
    always: bool


class RelationTables:
    """Dense per-frame relation bitmasks with id-based accessors."""

    def __init__(self, bits: np.ndarray, ids: tuple[str, ...]):
        self.bits = bits  # (k, k, F) uint8
        self.ids = ids
        self.index = {oid: i for i, oid in enumerate(ids)}

    def hold(self, relation: str, subject: str, obj: str) -> np.ndarray:
        bit = RELATION_BITS[relation]
        return (self.bits[self.index[subject], self.index[obj]] & bit) != 0

    def ever(self, relation: str, subject: str, obj: str) -> bool:
        return bool(self.hold(relation, subject, obj).any())

    def always(self, relation: str, subject: str, obj: str) -> bool:
        return bool(self.hold(relation, subject, obj).all())

    def subjects_ever(self, relation: str, obj: str) -> list[str]:
        """Ids that stand in `relation` to obj on at least one frame, scene order."""
        bit = RELATION_BITS[relation]
        col = (self.bits[:, self.index[obj], :] & bit) != 0
        mask = col.any(axis=1)
        return [oid for i, oid in enumerate(self.ids) if mask[i]]

    def subjects_always(self, relation: str, obj: str) -> list[str]:
        bit = RELATION_BITS[relation]
        col = (self.bits[:, self.index[obj], :] & bit) != 0
        mask = col.all(axis=1)
        return [oid for i, oid in enumerate(self.ids) if mask[i]]


def build_tables(temporal: TemporalScene, *, backend=None) -> RelationTables:
    be = backend if backend is not None else backend_pkg.active
    camera = temporal.graph.camera
    right = np.asarray(camera.right, dtype=np.float64)
    forward = np.asarray(camera.forward, dtype=np.float64)
    bits = be.relation_table(temporal.positions, right, forward, DEAD_ZONE)
    bits.setflags(write=False)
    return RelationTables(bits, temporal.graph.object_ids())


def build_tracks(temporal: TemporalScene) -> list[RelationTrack]:
    """All ordered-pair relation tracks with their ever/always aggregates."""
    tables = temporal.relations or build_tables(temporal)
    tracks: list[RelationTrack] = []
    for relation in RELATIONS:
        for subject in tables.ids:
            for obj in tables.ids:
                if subject == obj:
                    continue
                frames = tables.hold(relation, subject, obj)
                tracks.append(RelationTrack(relation=relation, subject_id=subject,
                                            object_id=obj, frames=frames,
                                            ever=bool(frames.any()),
                                            always=bool(frames.all())))
    return tracks


def attach(temporal: TemporalScene, *, backend=None) -> TemporalScene:
    """Return the scene with relation tables filled in (idempotent)."""
    if temporal.relations is not None:
        return temporal
    return replace(temporal, relations=build_tables(temporal, backend=backend))
