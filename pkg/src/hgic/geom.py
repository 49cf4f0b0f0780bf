"""Small vector helpers shared by the control modules."""

from __future__ import annotations

import math

import numpy as np

# Exact repr of 1/sqrt(2); hardcoded so the compiled kernel can use the same
# literal and stay bit-identical with the Python fallback.
_S = 0.7071067811865476

# Fixed table used to break ties when two agents sit on the exact same point
# (or an agent sits exactly on an obstacle center). Indexed by the lower id.
TIE_BREAK_DIRECTIONS: tuple[tuple[float, float, float], ...] = (
    (1.0, 0.0, 0.0),
    (-1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, -1.0, 0.0),
    (0.0, 0.0, 1.0),
    (0.0, 0.0, -1.0),
    (_S, _S, 0.0),
    (-_S, _S, 0.0),
    (_S, 0.0, _S),
    (0.0, _S, _S),
    (-_S, -_S, 0.0),
    (0.0, -_S, -_S),
)


def vec3(x: float = 0.0, y: float = 0.0, z: float = 0.0) -> np.ndarray:
    return np.array([x, y, z], dtype=float)


def norm(v) -> float:
    return math.sqrt(float(v[0]) ** 2 + float(v[1]) ** 2 + float(v[2]) ** 2)


def unit(v) -> np.ndarray:
    """Unit vector along v; the zero vector is returned unchanged."""
    n = norm(v)
    if n == 0.0:
        return np.zeros(3)
    return np.asarray(v, dtype=float) / n


def clamp_norm(v: np.ndarray, limit: float) -> np.ndarray:
    """Scale v down so its magnitude does not exceed limit."""
    n = norm(v)
    if n > limit:
        return v * (limit / n)
    return v


def tie_break_direction(low_id: int) -> np.ndarray:
    return np.array(TIE_BREAK_DIRECTIONS[low_id % len(TIE_BREAK_DIRECTIONS)])
