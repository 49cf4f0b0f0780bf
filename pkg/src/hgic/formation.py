"""Formation slot generation (V / Circle / Line), slot-seeking control,
and the transition plan used when switching between formations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .assignment import assign_slots
from .world import SwarmWorld, spacing_error


class FormationKind(str, Enum):
    V = "v"
    CIRCLE = "circle"
    LINE = "line"


# Half-angle of the V opening, slot-seek gain, and the completion rule
# (spacing error below EPS_COMPLETE for HOLD_TICKS consecutive ticks).
THETA_V = math.radians(25.0)
K_FORM = 1.2
EPS_COMPLETE = 0.5
HOLD_TICKS = 25


@dataclass
class FormationSpec:
    kind: FormationKind
    center: np.ndarray
    heading: float = 0.0
    scale: float = 10.0
    count: int = 1

    def __post_init__(self) -> None:
        self.kind = FormationKind(self.kind)
        self.center = np.asarray(self.center, dtype=float)
        if self.count < 1:
            raise ValueError("formation needs at least one slot")
        if self.scale <= 0:
            raise ValueError("formation scale must be positive")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "center": [float(v) for v in self.center],
            "heading": self.heading,
            "scale": self.scale,
            "count": self.count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FormationSpec":
        return cls(
            kind=FormationKind(d["kind"]),
            center=np.asarray(d.get("center", (0.0, 0.0, 30.0)), dtype=float),
            heading=float(d.get("heading", 0.0)),
            scale=float(d.get("scale", 10.0)),
            count=int(d["count"]),
        )


def generate_slots(spec: FormationSpec) -> list[np.ndarray]:
    """Slot points for the formation, in a fixed, deterministic order.

    Circle: equally spaced on the horizontal circle of radius `scale`,
    first slot along `heading`. Line: collinear perpendicular to heading,
    spacing `scale`, centered. V: apex at center pointing along heading,
    remaining slots alternating between the two trailing wings with
    in-wing spacing `scale` and half-angle THETA_V.
    """
    c = spec.center
    h = spec.heading
    n = spec.count
    slots: list[np.ndarray] = []
    if spec.kind is FormationKind.CIRCLE:
        for i in range(n):
            a = h + 2.0 * math.pi * i / n
            slots.append(c + spec.scale * np.array([math.cos(a), math.sin(a), 0.0]))
    elif spec.kind is FormationKind.LINE:
        u = np.array([-math.sin(h), math.cos(h), 0.0])
        for i in range(n):
            slots.append(c + (i - (n - 1) / 2.0) * spec.scale * u)
    else:  # V
        left = h + math.pi - THETA_V
        right = h + math.pi + THETA_V
        w_left = np.array([math.cos(left), math.sin(left), 0.0])
        w_right = np.array([math.cos(right), math.sin(right), 0.0])
        slots.append(c.copy())
        for i in range(1, n):
            rank = (i + 1) // 2
            wing = w_left if i % 2 == 1 else w_right
            slots.append(c + rank * spec.scale * wing)
    return slots


def formation_velocity(uav, slot: np.ndarray, k_f: float = K_FORM) -> np.ndarray:
    """Proportional slot-seek term; combined and speed-capped by the caller."""
    return k_f * (np.asarray(slot, dtype=float) - uav.position)


@dataclass
class TransitionPlan:
    """State of one in-flight formation change for a group of UAVs.

    Completion requires spacing error below EPS_COMPLETE for HOLD_TICKS
    consecutive ticks (hysteresis against overshoot).
    """

    spec: FormationSpec
    slots: list[np.ndarray]
    assignment: list[int]
    uav_ids: list[int]
    start_tick: int
    completed_tick: int | None = None
    _hold: int = 0

    @property
    def complete(self) -> bool:
        return self.completed_tick is not None

    def slot_for(self, uav_id: int) -> np.ndarray:
        return self.slots[self.assignment[self.uav_ids.index(uav_id)]]

    def update(self, err: float, tick: int) -> None:
        if self.completed_tick is not None:
            return
        if err < EPS_COMPLETE:
            self._hold += 1
            if self._hold >= HOLD_TICKS:
                self.completed_tick = tick
        else:
            self._hold = 0

    def recenter(self, center: np.ndarray) -> None:
        """Translate slots to a new center, keeping the assignment."""
        delta = np.asarray(center, dtype=float) - self.spec.center
        self.spec = replace(self.spec, center=np.asarray(center, dtype=float))
        self.slots = [s + delta for s in self.slots]


def switch_formation(
    world: SwarmWorld, uav_ids: list[int], to_spec: FormationSpec
) -> TransitionPlan:
    """Plan a transition: regenerate slots and re-assign from current positions."""
    if to_spec.count != len(uav_ids):
        raise ValueError(f"formation sized for {to_spec.count}, group has {len(uav_ids)}")
    slots = generate_slots(to_spec)
    positions = [world.uav_by_id(i).position for i in uav_ids]
    assignment = assign_slots(positions, slots)
    for uav_id, slot_idx in zip(uav_ids, assignment):
        world.uav_by_id(uav_id).slot_index = slot_idx
    return TransitionPlan(
        spec=to_spec,
        slots=slots,
        assignment=assignment,
        uav_ids=list(uav_ids),
        start_tick=world.tick,
    )


def group_spacing_error(world: SwarmWorld, plan: TransitionPlan) -> float:
    """Mean slot distance for the UAVs covered by a plan."""
    sub = SwarmWorld(
        uavs=[world.uav_by_id(i) for i in plan.uav_ids],
        obstacles=world.obstacles,
        region=world.region,
        dt=world.dt,
    )
    return spacing_error(sub, plan.slots, plan.assignment)
