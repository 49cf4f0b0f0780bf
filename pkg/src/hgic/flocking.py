"""Reflexive velocity terms: separation, cohesion, alignment, migration,
obstacle avoidance, and short-range half-spring repulsion.

These are the per-UAV reference implementations; the tick loop evaluates
the pairwise terms for the whole swarm through hgic.kernels, which must
agree with these functions.

All force laws are linear in the overlap (r - d) inside their interaction
radius and zero outside it. The half-spring term is strictly repulsive:
it has no attractive branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import clamp_norm, tie_break_direction, unit, vec3
from .world import Obstacle, UavState


@dataclass
class FlockParams:
    """Interaction radii (m), gains, and migration cruise speed (m/s)."""

    r_sep: float = 8.0
    r_coh: float = 20.0
    r_align: float = 15.0
    r_rep: float = 3.0
    r_obs: float = 6.0
    c_sep: float = 0.6
    c_coh: float = 0.15
    c_align: float = 0.4
    p_rep: float = 2.0
    c_obs: float = 1.0
    v_mig: float = 5.0

    def __post_init__(self) -> None:
        for name in ("r_sep", "r_coh", "r_align", "r_rep", "r_obs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.r_rep >= self.r_sep:
            raise ValueError("r_rep must be below r_sep (repulsion is the short-range layer)")
        for name in ("c_sep", "c_coh", "c_align", "p_rep", "c_obs"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "FlockParams":
        return cls(**d)


def _away(self_uav: UavState, other: UavState) -> tuple[np.ndarray, float]:
    """Direction from other to self and the separation distance.

    Coincident positions fall back to a fixed direction picked by the lower
    id, negated for the higher id so the pair stays antisymmetric.
    """
    dx = self_uav.position - other.position
    d = math.sqrt(dx[0] ** 2 + dx[1] ** 2 + dx[2] ** 2)
    if d == 0.0:
        low, high = sorted((self_uav.id, other.id))
        direction = tie_break_direction(low)
        if self_uav.id != low:
            direction = -direction
        return direction, 0.0
    return dx / d, d


def separation_velocity(self_uav: UavState, neighbors: list[UavState], p: FlockParams) -> np.ndarray:
    """Sum of (r_sep - d) pushes away from every neighbor inside r_sep."""
    out = np.zeros(3)
    for nb in neighbors:
        direction, d = _away(self_uav, nb)
        if d < p.r_sep:
            out += (p.r_sep - d) * direction
    return p.c_sep * out


def cohesion_velocity(self_uav: UavState, neighbors: list[UavState], p: FlockParams) -> np.ndarray:
    """Pull toward the centroid of neighbors inside r_coh."""
    centroid = np.zeros(3)
    count = 0
    for nb in neighbors:
        dx = nb.position - self_uav.position
        if math.sqrt(dx[0] ** 2 + dx[1] ** 2 + dx[2] ** 2) < p.r_coh:
            centroid += nb.position
            count += 1
    if count == 0:
        return np.zeros(3)
    return p.c_coh * (centroid / count - self_uav.position)


def alignment_velocity(self_uav: UavState, neighbors: list[UavState], p: FlockParams) -> np.ndarray:
    """Steer toward the mean velocity of neighbors inside r_align."""
    mean_v = np.zeros(3)
    count = 0
    for nb in neighbors:
        dx = nb.position - self_uav.position
        if math.sqrt(dx[0] ** 2 + dx[1] ** 2 + dx[2] ** 2) < p.r_align:
            mean_v += nb.velocity
            count += 1
    if count == 0:
        return np.zeros(3)
    return p.c_align * (mean_v / count - self_uav.velocity)


def half_spring_repulsion(self_uav: UavState, neighbors: list[UavState], p: FlockParams) -> np.ndarray:
    """Short-range linear spring active only below r_rep, never attractive."""
    out = np.zeros(3)
    for nb in neighbors:
        direction, d = _away(self_uav, nb)
        if d < p.r_rep:
            out += (p.r_rep - d) * direction
    return p.p_rep * out


def obstacle_avoidance_velocity(
    self_uav: UavState, obstacles: list[Obstacle], p: FlockParams
) -> np.ndarray:
    """Push away from every sphere whose surface is closer than r_obs.

    Inside an obstacle the push is straight away from the center at full
    gain (degenerate rule; surface distance is negative there).
    """
    out = np.zeros(3)
    for obs in obstacles:
        dx = self_uav.position - obs.center
        d_center = math.sqrt(dx[0] ** 2 + dx[1] ** 2 + dx[2] ** 2)
        if d_center == 0.0:
            direction = tie_break_direction(self_uav.id)
            out += p.r_obs * direction
            continue
        s = d_center - obs.radius
        if s < 0.0:
            out += p.r_obs * (dx / d_center)
        elif s < p.r_obs:
            out += (p.r_obs - s) * (dx / d_center)
    return p.c_obs * out


def migration_velocity(self_uav: UavState, target: np.ndarray, p: FlockParams) -> np.ndarray:
    """Cruise at v_mig toward target; zero within 0.1 m of it."""
    dx = np.asarray(target, dtype=float) - self_uav.position
    d = math.sqrt(dx[0] ** 2 + dx[1] ** 2 + dx[2] ** 2)
    if d < 0.1:
        return np.zeros(3)
    return p.v_mig * (dx / d)


def combine_velocity(terms: list[np.ndarray], v_max: float) -> np.ndarray:
    """Vector sum of the active terms, speed-capped preserving direction."""
    total = np.zeros(3)
    for t in terms:
        total = total + t
    return clamp_norm(total, v_max)
