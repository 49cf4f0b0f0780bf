# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise interaction kernel.

Twin of _pykernels.flock_terms with identical operation order; built with
-ffp-contract=off so results stay bit-identical with the Python fallback.
"""

from libc.math cimport sqrt

import numpy as np


# Same table as hgic.geom.TIE_BREAK_DIRECTIONS (0.7071... is the exact
# repr of 1/sqrt(2)).
cdef double[12][3] _TIE = [
    [1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0],
    [0.7071067811865476, 0.7071067811865476, 0.0],
    [-0.7071067811865476, 0.7071067811865476, 0.0],
    [0.7071067811865476, 0.0, 0.7071067811865476],
    [0.0, 0.7071067811865476, 0.7071067811865476],
    [-0.7071067811865476, -0.7071067811865476, 0.0],
    [0.0, -0.7071067811865476, -0.7071067811865476],
]


def flock_terms(
    double[:, ::1] positions,
    double[:, ::1] velocities,
    long[::1] ids,
    long[::1] group_ids,
    double r_sep,
    double c_sep,
    double r_coh,
    double c_coh,
    double r_align,
    double c_align,
    double r_rep,
    double p_rep,
    bint coh_same_group=True,
    bint align_same_group=True,
):
    cdef Py_ssize_t n = positions.shape[0]
    sep_arr = np.zeros((n, 3))
    coh_arr = np.zeros((n, 3))
    ali_arr = np.zeros((n, 3))
    rep_arr = np.zeros((n, 3))
    cdef double[:, ::1] sep = sep_arr
    cdef double[:, ::1] coh = coh_arr
    cdef double[:, ::1] ali = ali_arr
    cdef double[:, ::1] rep = rep_arr

    cdef Py_ssize_t i, j
    cdef double xi, yi, zi, dx, dy, dz, d, w, ux, uy, uz, tx, ty, tz
    cdef double sx, sy, sz, rx, ry, rz, cx, cy, cz, ax, ay, az
    cdef long c_cnt, a_cnt, low
    cdef bint same

    for i in range(n):
        xi = positions[i, 0]
        yi = positions[i, 1]
        zi = positions[i, 2]
        sx = sy = sz = 0.0
        rx = ry = rz = 0.0
        cx = cy = cz = 0.0
        c_cnt = 0
        ax = ay = az = 0.0
        a_cnt = 0
        for j in range(n):
            if j == i:
                continue
            dx = xi - positions[j, 0]
            dy = yi - positions[j, 1]
            dz = zi - positions[j, 2]
            d = sqrt(dx * dx + dy * dy + dz * dz)
            if d == 0.0:
                low = ids[i] if ids[i] < ids[j] else ids[j]
                tx = _TIE[low % 12][0]
                ty = _TIE[low % 12][1]
                tz = _TIE[low % 12][2]
                if ids[i] != low:
                    tx = -tx
                    ty = -ty
                    tz = -tz
                ux = tx
                uy = ty
                uz = tz
            else:
                ux = dx / d
                uy = dy / d
                uz = dz / d
            if d < r_sep:
                w = r_sep - d
                sx += w * ux
                sy += w * uy
                sz += w * uz
            if d < r_rep:
                w = r_rep - d
                rx += w * ux
                ry += w * uy
                rz += w * uz
            same = group_ids[i] == group_ids[j]
            if d < r_coh and (same or not coh_same_group):
                cx += positions[j, 0]
                cy += positions[j, 1]
                cz += positions[j, 2]
                c_cnt += 1
            if d < r_align and (same or not align_same_group):
                ax += velocities[j, 0]
                ay += velocities[j, 1]
                az += velocities[j, 2]
                a_cnt += 1
        sep[i, 0] = c_sep * sx
        sep[i, 1] = c_sep * sy
        sep[i, 2] = c_sep * sz
        rep[i, 0] = p_rep * rx
        rep[i, 1] = p_rep * ry
        rep[i, 2] = p_rep * rz
        if c_cnt > 0:
            coh[i, 0] = c_coh * (cx / c_cnt - xi)
            coh[i, 1] = c_coh * (cy / c_cnt - yi)
            coh[i, 2] = c_coh * (cz / c_cnt - zi)
        if a_cnt > 0:
            ali[i, 0] = c_align * (ax / a_cnt - velocities[i, 0])
            ali[i, 1] = c_align * (ay / a_cnt - velocities[i, 1])
            ali[i, 2] = c_align * (az / a_cnt - velocities[i, 2])
    return sep_arr, coh_arr, ali_arr, rep_arr
