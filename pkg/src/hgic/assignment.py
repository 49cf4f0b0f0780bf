"""Minimum-cost UAV-to-slot assignment.

Solves the square assignment problem on total squared distance via the
Hungarian method (scipy's linear_sum_assignment), then refines exact-cost
ties to the lexicographically smallest permutation so repeated runs and
symmetric configurations resolve deterministically.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

MAX_AGENTS = 64

# Two optima whose costs differ by less than this (relative) are a tie and
# resolved lexicographically.
_TIE_REL = 1e-12


def assignment_cost(positions: np.ndarray, slots: np.ndarray, perm: list[int]) -> float:
    """Total squared distance of the assignment uav i -> slots[perm[i]]."""
    diff = positions - slots[np.asarray(perm)]
    return float(np.sum(diff * diff))


def assign_slots(positions, slots) -> list[int]:
    """Bijection uav index -> slot index minimizing total squared distance.

    Raises:
        ValueError: length mismatch or more than MAX_AGENTS agents.
    """
    pos = np.asarray(positions, dtype=float).reshape(len(positions), -1)
    slt = np.asarray(slots, dtype=float).reshape(len(slots), -1)
    n = pos.shape[0]
    if slt.shape[0] != n:
        raise ValueError(f"{n} positions but {slt.shape[0]} slots")
    if n > MAX_AGENTS:
        raise ValueError(f"assignment capped at {MAX_AGENTS} agents, got {n}")
    if n == 0:
        return []

    cost = np.sum((pos[:, None, :] - slt[None, :, :]) ** 2, axis=2)
    rows, cols = linear_sum_assignment(cost)
    best = float(cost[rows, cols].sum())
    tol = _TIE_REL * max(1.0, best)

    # Pin rows in order to the smallest slot index that still admits an
    # optimal completion; equivalent to the lexicographically smallest
    # minimum-cost permutation.
    perm: list[int] = []
    free = list(range(n))
    fixed_cost = 0.0
    for i in range(n):
        rest_rows = list(range(i + 1, n))
        for c in free:
            if len(rest_rows) == 0:
                sub_best = 0.0
            else:
                remaining = [f for f in free if f != c]
                sub = cost[np.ix_(rest_rows, remaining)]
                r2, c2 = linear_sum_assignment(sub)
                sub_best = float(sub[r2, c2].sum())
            if fixed_cost + cost[i, c] + sub_best <= best + tol:
                perm.append(c)
                fixed_cost += float(cost[i, c])
                free.remove(c)
                break
    return perm
