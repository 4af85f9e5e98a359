"""NumPy fallback kernels: per-frame state evaluation, margin scan, relations.

The compiled extension implements the same three entry points with the same
formulas; both must agree bit-for-bit on integer outputs and to float
round-off on positions. Phase arithmetic is done on integers
(r = frame * passes mod F) so cycle endpoints are exact.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_DEG = np.pi / 180.0


def _phase(frames: np.ndarray, passes: int, frame_count: int) -> np.ndarray:
    return (frames * passes) % frame_count


def _triangle(r: np.ndarray, frame_count: int) -> np.ndarray:
    return np.where(2 * r <= frame_count,
                    (2.0 * r) / frame_count,
                    (2.0 * (frame_count - r)) / frame_count)


def _nearest_color(hues: np.ndarray, palette_hues: np.ndarray) -> np.ndarray:
    d = np.abs(hues[:, None] - palette_hues[None, :])
    d = np.minimum(d, 360.0 - d)
    # argmin returns the first minimal index, which is the tie-break rule
    return d.argmin(axis=1).astype(np.int8)


def eval_states(p) -> tuple[np.ndarray, ...]:
    """Evaluate all object states over the frame grid of a packed scene.

    Returns (pos_xy, scale, orientation, hue, size_code, color_code) with
    leading axes (object, frame). Objects are visited in topological order
    so orbit centers are evaluated before their satellites.
    """
    k = p.count
    F = p.frame_count
    frames = np.arange(F, dtype=np.int64)

    pos = np.empty((k, F, 2), dtype=np.float64)
    scale = np.empty((k, F), dtype=np.float64)
    orient = np.empty((k, F), dtype=np.float64)
    hue = np.empty((k, F), dtype=np.float64)
    size_code = np.empty((k, F), dtype=np.int8)
    color_code = np.empty((k, F), dtype=np.int8)

    for i in p.order:
        if p.size_passes[i]:
            r = _phase(frames, p.size_passes[i], F)
            tri = _triangle(r, F)
            scale[i] = p.scale0[i] + tri * (p.scale1[i] - p.scale0[i])
            size_code[i] = np.where(r == 0, p.size0_code[i],
                                    np.where(2 * r == F, p.size1_code[i], 2))
        else:
            scale[i] = p.scale0[i]
            size_code[i] = p.size0_code[i]

        if p.color_passes[i]:
            r = _phase(frames, p.color_passes[i], F)
            tri = _triangle(r, F)
            h = (p.hue0[i] + tri * p.hue_delta[i]) % 360.0
            hue[i] = h
            color_code[i] = _nearest_color(h, p.palette_hues)
        else:
            hue[i] = p.hue0[i]
            color_code[i] = p.color0_idx[i]

        if p.orient_passes[i]:
            r = _phase(frames, p.orient_passes[i], F)
            orient[i] = (p.orient0[i] + p.orient_turns[i] * 360.0 * (r / F)) % 360.0
        else:
            orient[i] = p.orient0[i]

        kind = p.motion_kind[i]
        if kind == 1:
            r = _phase(frames, p.pos_passes[i], F)
            tri = _triangle(r, F)
            pos[i, :, 0] = p.base_xy[i, 0] + tri * (p.switch_xy[i, 0] - p.base_xy[i, 0])
            pos[i, :, 1] = p.base_xy[i, 1] + tri * (p.switch_xy[i, 1] - p.base_xy[i, 1])
        elif kind == 2:
            r = _phase(frames, p.pos_passes[i], F)
            ang = (p.gamma0[i] + p.dir_sign[i] * 360.0 * (r / F)) * _DEG
            center = pos[p.center_idx[i]]
            pos[i, :, 0] = center[:, 0] + p.radius[i] * np.cos(ang)
            pos[i, :, 1] = center[:, 1] + p.radius[i] * np.sin(ang)
        else:
            pos[i, :, 0] = p.base_xy[i, 0]
            pos[i, :, 1] = p.base_xy[i, 1]

    return pos, scale, orient, hue, size_code, color_code


def margin_scan(pos: np.ndarray, rb: np.ndarray, bounds_x, bounds_y,
                object_margin: float, boundary_margin: float,
                focus: int = -1) -> np.ndarray:
    """Find the earliest margin violation, or (-1, -1, -1) if there is none.

    Scans frame-major; within a frame, boundary checks (by object index)
    precede pair checks (lexicographic). With focus >= 0 only the focus
    object's boundary and its pairs against lower indices are checked.
    Returns int64 [frame, i, j]; a boundary violation has j == -1, a pair
    violation reports i < j.
    """
    k, F, _ = pos.shape
    x = pos[:, :, 0]
    y = pos[:, :, 1]

    x_lo = bounds_x[0] + boundary_margin
    x_hi = bounds_x[1] - boundary_margin
    y_lo = bounds_y[0] + boundary_margin
    y_hi = bounds_y[1] - boundary_margin
    bviol = ((x - rb < x_lo) | (x + rb > x_hi) |
             (y - rb < y_lo) | (y + rb > y_hi))

    dx = x[:, None, :] - x[None, :, :]
    dy = y[:, None, :] - y[None, :, :]
    limit = rb[:, None, :] + rb[None, :, :] + object_margin
    pviol = dx * dx + dy * dy < limit * limit
    upper = np.triu(np.ones((k, k), dtype=bool), 1)
    pviol &= upper[:, :, None]

    if focus >= 0:
        keep = np.zeros(k, dtype=bool)
        keep[focus] = True
        bviol = bviol & keep[:, None]
        pair_keep = np.zeros((k, k), dtype=bool)
        pair_keep[:focus, focus] = True
        pviol = pviol & pair_keep[:, :, None]

    frame_any = bviol.any(axis=0) | pviol.any(axis=(0, 1))
    if not frame_any.any():
        return np.array([-1, -1, -1], dtype=np.int64)
    f = int(np.argmax(frame_any))
    col = bviol[:, f]
    if col.any():
        return np.array([f, int(np.argmax(col)), -1], dtype=np.int64)
    hits = np.argwhere(pviol[:, :, f])
    i, j = hits[0]
    return np.array([f, int(i), int(j)], dtype=np.int64)


def relation_table(pos: np.ndarray, right: np.ndarray, forward: np.ndarray,
                   eps: float) -> np.ndarray:
    """Per-frame spatial relation bitmask, shape (k, k, F) uint8.

    Entry [a, b, f] has bit 1 if a is left of b at frame f, bit 2 for
    right, bit 4 for front, bit 8 for behind. Projections within eps of
    zero set no bit (dead zone).
    """
    d = pos[:, None, :, :] - pos[None, :, :, :]
    pr = d[..., 0] * right[0] + d[..., 1] * right[1]
    pf = d[..., 0] * forward[0] + d[..., 1] * forward[1]
    table = np.zeros(pr.shape, dtype=np.uint8)
    table |= np.where(pr < -eps, np.uint8(1), np.uint8(0))
    table |= np.where(pr > eps, np.uint8(2), np.uint8(0))
    table |= np.where(pf < -eps, np.uint8(4), np.uint8(0))
    table |= np.where(pf > eps, np.uint8(8), np.uint8(0))
    return table
