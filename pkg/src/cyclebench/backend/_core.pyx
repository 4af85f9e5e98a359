# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels, mirroring numpy_impl formula for formula.

Integer outputs (codes, violation triples, relation bitmasks) must be
bit-identical to the fallback; float outputs agree to round-off because the
arithmetic is ordered identically.
"""

import numpy as np

from libc.math cimport cos, fabs, fmod, sin

BACKEND_NAME = "compiled"

cdef double DEG = 3.141592653589793 / 180.0


cdef inline double _tri(long r, long F) noexcept nogil:
    if 2 * r <= F:
        return (2.0 * r) / F
    return (2.0 * (F - r)) / F


cdef inline double _mod360(double x) noexcept nogil:
    cdef double m = fmod(x, 360.0)
    if m != 0.0 and m < 0.0:
        m += 360.0
    return m


cdef inline signed char _nearest(double h, double[:] palette) noexcept nogil:
    cdef signed char best = 0
    cdef double best_d, d
    cdef long c
    best_d = fabs(h - palette[0])
    if 360.0 - best_d < best_d:
        best_d = 360.0 - best_d
    for c in range(1, palette.shape[0]):
        d = fabs(h - palette[c])
        if 360.0 - d < d:
            d = 360.0 - d
        if d < best_d:
            best_d = d
            best = <signed char>c
    return best


def eval_states(p):
    """Evaluate object states over the frame grid; see numpy_impl.eval_states."""
    cdef long k = p.count
    cdef long F = p.frame_count

    cdef long[:] order = p.order
    cdef long[:] motion_kind = p.motion_kind
    cdef double[:, :] base_xy = p.base_xy
    cdef double[:, :] switch_xy = p.switch_xy
    cdef long[:] pos_passes = p.pos_passes
    cdef long[:] center_idx = p.center_idx
    cdef double[:] radius = p.radius
    cdef double[:] gamma0 = p.gamma0
    cdef double[:] dir_sign = p.dir_sign
    cdef double[:] scale0 = p.scale0
    cdef double[:] scale1 = p.scale1
    cdef long[:] size_passes = p.size_passes
    cdef long[:] size0_code = p.size0_code
    cdef long[:] size1_code = p.size1_code
    cdef double[:] hue0 = p.hue0
    cdef double[:] hue_delta = p.hue_delta
    cdef long[:] color_passes = p.color_passes
    cdef long[:] color0_idx = p.color0_idx
    cdef double[:] orient0 = p.orient0
    cdef long[:] orient_turns = p.orient_turns
    cdef long[:] orient_passes = p.orient_passes
    cdef double[:] palette = p.palette_hues

    pos_arr = np.empty((k, F, 2), dtype=np.float64)
    scale_arr = np.empty((k, F), dtype=np.float64)
    orient_arr = np.empty((k, F), dtype=np.float64)
    hue_arr = np.empty((k, F), dtype=np.float64)
    size_arr = np.empty((k, F), dtype=np.int8)
    color_arr = np.empty((k, F), dtype=np.int8)

    cdef double[:, :, :] pos = pos_arr
    cdef double[:, :] scale = scale_arr
    cdef double[:, :] orient = orient_arr
    cdef double[:, :] hue = hue_arr
    cdef signed char[:, :] size_code = size_arr
    cdef signed char[:, :] color_code = color_arr

    cdef long oi, i, f, r, c
    cdef double tri, h, ang

    for oi in range(k):
        i = order[oi]

        if size_passes[i] > 0:
            for f in range(F):
                r = (f * size_passes[i]) % F
                tri = _tri(r, F)
                scale[i, f] = scale0[i] + tri * (scale1[i] - scale0[i])
                if r == 0:
                    size_code[i, f] = <signed char>size0_code[i]
                elif 2 * r == F:
                    size_code[i, f] = <signed char>size1_code[i]
                else:
                    size_code[i, f] = 2
        else:
            for f in range(F):
                scale[i, f] = scale0[i]
                size_code[i, f] = <signed char>size0_code[i]

        if color_passes[i] > 0:
            for f in range(F):
                r = (f * color_passes[i]) % F
                tri = _tri(r, F)
                h = _mod360(hue0[i] + tri * hue_delta[i])
                hue[i, f] = h
                color_code[i, f] = _nearest(h, palette)
        else:
            for f in range(F):
                hue[i, f] = hue0[i]
                color_code[i, f] = <signed char>color0_idx[i]

        if orient_passes[i] > 0:
            for f in range(F):
                r = (f * orient_passes[i]) % F
                orient[i, f] = _mod360(orient0[i] + orient_turns[i] * 360.0 * ((<double>r) / F))
        else:
            for f in range(F):
                orient[i, f] = orient0[i]

        if motion_kind[i] == 1:
            for f in range(F):
                r = (f * pos_passes[i]) % F
                tri = _tri(r, F)
                pos[i, f, 0] = base_xy[i, 0] + tri * (switch_xy[i, 0] - base_xy[i, 0])
                pos[i, f, 1] = base_xy[i, 1] + tri * (switch_xy[i, 1] - base_xy[i, 1])
        elif motion_kind[i] == 2:
            c = center_idx[i]
            for f in range(F):
                r = (f * pos_passes[i]) % F
                ang = (gamma0[i] + dir_sign[i] * 360.0 * ((<double>r) / F)) * DEG
                pos[i, f, 0] = pos[c, f, 0] + radius[i] * cos(ang)
                pos[i, f, 1] = pos[c, f, 1] + radius[i] * sin(ang)
        else:
            for f in range(F):
                pos[i, f, 0] = base_xy[i, 0]
                pos[i, f, 1] = base_xy[i, 1]

    return pos_arr, scale_arr, orient_arr, hue_arr, size_arr, color_arr


def margin_scan(pos, rb, bounds_x, bounds_y, double object_margin,
                double boundary_margin, long focus=-1):
    """Earliest margin violation as int64 [frame, i, j]; none is all -1."""
    cdef const double[:, :, :] P = pos
    cdef const double[:, :] R = rb
    cdef long k = P.shape[0]
    cdef long F = P.shape[1]
    cdef double x_lo = <double>bounds_x[0] + boundary_margin
    cdef double x_hi = <double>bounds_x[1] - boundary_margin
    cdef double y_lo = <double>bounds_y[0] + boundary_margin
    cdef double y_hi = <double>bounds_y[1] - boundary_margin

    cdef long f, i, j, lo, hi
    cdef double x, y, dx, dy, limit

    out = np.empty(3, dtype=np.int64)
    cdef long[:] o = out

    for f in range(F):
        if focus >= 0:
            lo = focus
            hi = focus + 1
        else:
            lo = 0
            hi = k
        for i in range(lo, hi):
            x = P[i, f, 0]
            y = P[i, f, 1]
            if (x - R[i, f] < x_lo or x + R[i, f] > x_hi or
                    y - R[i, f] < y_lo or y + R[i, f] > y_hi):
                o[0] = f
                o[1] = i
                o[2] = -1
                return out
        if focus >= 0:
            for j in range(focus):
                dx = P[j, f, 0] - P[focus, f, 0]
                dy = P[j, f, 1] - P[focus, f, 1]
                limit = R[j, f] + R[focus, f] + object_margin
                if dx * dx + dy * dy < limit * limit:
                    o[0] = f
                    o[1] = j
                    o[2] = focus
                    return out
        else:
            for i in range(k):
                for j in range(i + 1, k):
                    dx = P[i, f, 0] - P[j, f, 0]
                    dy = P[i, f, 1] - P[j, f, 1]
                    limit = R[i, f] + R[j, f] + object_margin
                    if dx * dx + dy * dy < limit * limit:
                        o[0] = f
                        o[1] = i
                        o[2] = j
                        return out

    o[0] = -1
    o[1] = -1
    o[2] = -1
    return out


def relation_table(pos, right, forward, double eps):
    """Per-frame relation bitmask (k, k, F) uint8; see numpy_impl."""
    cdef const double[:, :, :] P = pos
    cdef long k = P.shape[0]
    cdef long F = P.shape[1]
    cdef double rx = <double>right[0]
    cdef double ry = <double>right[1]
    cdef double fx = <double>forward[0]
    cdef double fy = <double>forward[1]

    table_arr = np.zeros((k, k, F), dtype=np.uint8)
    cdef unsigned char[:, :, :] table = table_arr

    cdef long a, b, f
    cdef double dx, dy, pr, pf
    cdef unsigned char bits

    for a in range(k):
        for b in range(k):
            if a == b:
                continue
            for f in range(F):
                dx = P[a, f, 0] - P[b, f, 0]
                dy = P[a, f, 1] - P[b, f, 1]
                pr = dx * rx + dy * ry
                pf = dx * fx + dy * fy
                bits = 0
                if pr < -eps:
                    bits |= 1
                if pr > eps:
                    bits |= 2
                if pf < -eps:
                    bits |= 4
                if pf > eps:
                    bits |= 8
                table[a, b, f] = bits

    return table_arr
