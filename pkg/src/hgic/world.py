"""Simulation world: kinematic state, integration step, and mission metrics.

The swarm is modelled as velocity-commanded point masses integrated with
explicit Euler steps at a fixed dt. Commanded velocities pass through an
acceleration limit (relative to the previous velocity) and a hard speed cap
before integration, and positions are clamped to the world region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import vec3


@dataclass
class UavState:
    """Kinematic state of one simulated UAV."""

    id: int
    position: np.ndarray
    velocity: np.ndarray
    group_id: int = 0
    slot_index: int | None = None

    def copy(self) -> "UavState":
        return UavState(
            id=self.id,
            position=self.position.copy(),
            velocity=self.velocity.copy(),
            group_id=self.group_id,
            slot_index=self.slot_index,
        )


@dataclass
class Obstacle:
    center: np.ndarray
    radius: float


@dataclass
class Box:
    """Axis-aligned world region, meters."""

    lo: np.ndarray
    hi: np.ndarray

    def contains(self, p: np.ndarray) -> bool:
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))


@dataclass
class MotionLimits:
    v_max: float = 10.0
    a_max: float = 20.0
    d_col: float = 1.0


@dataclass
class MissionMetrics:
    """Accumulators mirrored into the end-of-run metrics summary."""

    collision_count: int = 0
    speed_min: list[float] = field(default_factory=list)
    speed_mean: list[float] = field(default_factory=list)
    speed_max: list[float] = field(default_factory=list)
    spacing_error_series: list[float] = field(default_factory=list)
    duration_s: float = 0.0

    def record_speeds(self, speeds: np.ndarray, dt: float) -> None:
        if speeds.size:
            self.speed_min.append(float(speeds.min()))
            self.speed_mean.append(float(speeds.mean()))
            self.speed_max.append(float(speeds.max()))
        self.duration_s += dt

    def summary(self) -> dict:
        """Run-level metrics with the same row names as the mission report."""
        spacing = self.spacing_error_series
        return {
            "duration_s": self.duration_s,
            "max_velocity": max(self.speed_max) if self.speed_max else 0.0,
            "avg_velocity": (
                sum(self.speed_mean) / len(self.speed_mean) if self.speed_mean else 0.0
            ),
            "avg_spacing_error": sum(spacing) / len(spacing) if spacing else 0.0,
            "max_spacing_error": max(spacing) if spacing else 0.0,
            "collisions": self.collision_count,
        }


@dataclass
class SwarmWorld:
    """Full simulation state advanced by step_world()."""

    uavs: list[UavState]
    obstacles: list[Obstacle] = field(default_factory=list)
    region: Box = field(default_factory=lambda: Box(vec3(-500, -500, 0), vec3(500, 500, 200)))
    dt: float = 0.02
    tick: int = 0
    rng_seed: int = 0
    limits: MotionLimits = field(default_factory=MotionLimits)
    metrics: MissionMetrics = field(default_factory=MissionMetrics)
    # Unordered id pairs currently closer than d_col; collision events are
    # edge-triggered on entry into this set.
    colliding_pairs: set[tuple[int, int]] = field(default_factory=set)

    def positions(self) -> np.ndarray:
        return np.array([u.position for u in self.uavs], dtype=float).reshape(len(self.uavs), 3)

    def velocities(self) -> np.ndarray:
        return np.array([u.velocity for u in self.uavs], dtype=float).reshape(len(self.uavs), 3)

    def group_ids(self) -> np.ndarray:
        return np.array([u.group_id for u in self.uavs], dtype=np.int64)

    def uav_by_id(self, uav_id: int) -> UavState:
        for u in self.uavs:
            if u.id == uav_id:
                return u
        raise KeyError(f"unknown UAV id {uav_id}")


def step_world(
    world: SwarmWorld,
    commanded_velocities: np.ndarray,
    override_velocities: np.ndarray | None = None,
) -> SwarmWorld:
    """Advance the world one tick under the commanded velocities.

    Each commanded velocity is clamped to the acceleration limit
    a_max*dt relative to the UAV's previous velocity, then to magnitude
    v_max, then integrated. `override_velocities` is a per-UAV boolean
    mask that bypasses the acceleration limit (emergency stop applies
    its command as-is, still speed-capped).

    Raises:
        ValueError: command count does not match the UAV count.
    """
    cmds = np.asarray(commanded_velocities, dtype=float)
    n = len(world.uavs)
    if cmds.shape != (n, 3):
        raise ValueError(f"expected {n} commanded velocities, got shape {cmds.shape}")
    if world.dt <= 0:
        raise ValueError("dt must be positive")

    lim = world.limits
    dv_max = lim.a_max * world.dt
    speeds = np.empty(n)
    for i, uav in enumerate(world.uavs):
        cmd = cmds[i]
        if override_velocities is not None and override_velocities[i]:
            v = cmd.copy()
        else:
            dv = cmd - uav.velocity
            dn = math.sqrt(dv[0] ** 2 + dv[1] ** 2 + dv[2] ** 2)
            if dn > dv_max:
                dv = dv * (dv_max / dn)
            v = uav.velocity + dv
        vn = math.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2)
        if vn > lim.v_max:
            v = v * (lim.v_max / vn)
        p = uav.position + v * world.dt
        # Boundary rule: clamp to the region box, zeroing the velocity
        # component that hit the wall.
        for k in range(3):
            if p[k] < world.region.lo[k]:
                p[k] = world.region.lo[k]
                v[k] = 0.0
            elif p[k] > world.region.hi[k]:
                p[k] = world.region.hi[k]
                v[k] = 0.0
        uav.velocity = v
        uav.position = p
        speeds[i] = math.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2)

    world.metrics.record_speeds(speeds, world.dt)
    world.tick += 1
    return world


def detect_collisions(world: SwarmWorld, d_col: float) -> int:
    """Count new collision events this tick.

    An event is one unordered pair crossing from >= d_col to < d_col;
    a pair staying below d_col does not re-count until it separates.
    """
    if d_col <= 0:
        raise ValueError("d_col must be positive")
    uavs = world.uavs
    below: set[tuple[int, int]] = set()
    for i in range(len(uavs)):
        pi = uavs[i].position
        for j in range(i + 1, len(uavs)):
            dq = pi - uavs[j].position
            if dq[0] ** 2 + dq[1] ** 2 + dq[2] ** 2 < d_col * d_col:
                a, b = uavs[i].id, uavs[j].id
                below.add((a, b) if a < b else (b, a))
    new_events = len(below - world.colliding_pairs)
    world.colliding_pairs = below
    world.metrics.collision_count += new_events
    return new_events


def spacing_error(world: SwarmWorld, slots: list[np.ndarray], assignment: list[int]) -> float:
    """Mean distance from each UAV to its assigned formation slot."""
    n = len(world.uavs)
    if len(slots) != n or len(assignment) != n:
        raise ValueError(f"need {n} slots and assignments, got {len(slots)}/{len(assignment)}")
    if sorted(assignment) != list(range(n)):
        raise ValueError("assignment is not a permutation")
    total = 0.0
    for i, uav in enumerate(world.uavs):
        d = uav.position - slots[assignment[i]]
        total += math.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2)
    return total / n
