"""Pure-Python pairwise interaction kernel.

Scalar loop twin of the compiled kernel in _ckernels.pyx: identical
operation order, so results are bit-identical across backends. Keep the
two files in sync when touching either.
"""

from __future__ import annotations

import math

import numpy as np

from ..geom import TIE_BREAK_DIRECTIONS

_N_TIE = len(TIE_BREAK_DIRECTIONS)


def flock_terms(
    positions: np.ndarray,
    velocities: np.ndarray,
    ids: np.ndarray,
    group_ids: np.ndarray,
    r_sep: float,
    c_sep: float,
    r_coh: float,
    c_coh: float,
    r_align: float,
    c_align: float,
    r_rep: float,
    p_rep: float,
    coh_same_group: bool = True,
    align_same_group: bool = True,
):
    """Per-UAV separation, cohesion, alignment, and half-spring terms.

    Separation and repulsion act across the whole swarm; cohesion and
    alignment can be restricted to same-group neighbors.
    """
    n = positions.shape[0]
    pos = positions.tolist()
    vel = velocities.tolist()
    idv = ids.tolist()
    grp = group_ids.tolist()

    sep = np.zeros((n, 3))
    coh = np.zeros((n, 3))
    ali = np.zeros((n, 3))
    rep = np.zeros((n, 3))

    for i in range(n):
        xi, yi, zi = pos[i]
        sx = sy = sz = 0.0
        rx = ry = rz = 0.0
        cx = cy = cz = 0.0
        c_cnt = 0
        ax = ay = az = 0.0
        a_cnt = 0
        for j in range(n):
            if j == i:
                continue
            dx = xi - pos[j][0]
            dy = yi - pos[j][1]
            dz = zi - pos[j][2]
            d = math.sqrt(dx * dx + dy * dy + dz * dz)
            if d == 0.0:
                low = idv[i] if idv[i] < idv[j] else idv[j]
                tx, ty, tz = TIE_BREAK_DIRECTIONS[low % _N_TIE]
                if idv[i] != low:
                    tx, ty, tz = -tx, -ty, -tz
                ux, uy, uz = tx, ty, tz
            else:
                ux, uy, uz = dx / d, dy / d, dz / d
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
            same = grp[i] == grp[j]
            if d < r_coh and (same or not coh_same_group):
                cx += pos[j][0]
                cy += pos[j][1]
                cz += pos[j][2]
                c_cnt += 1
            if d < r_align and (same or not align_same_group):
                ax += vel[j][0]
                ay += vel[j][1]
                az += vel[j][2]
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
            ali[i, 0] = c_align * (ax / a_cnt - vel[i][0])
            ali[i, 1] = c_align * (ay / a_cnt - vel[i][1])
            ali[i, 2] = c_align * (az / a_cnt - vel[i][2])
    return sep, coh, ali, rep
