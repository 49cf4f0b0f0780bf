"""Coordination layer: command model, mode-gated priority dispatch, UAV
grouping (split/merge), and per-group task allocation.

Commands come in two priorities. Global commands (the safety verbs and
switch_mode) execute in any mode and preempt in-flight transitions. Local
commands execute only when their mode matches the controller's current
mode; mismatches are rejected and echoed to telemetry rather than dropped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    NAVIGATION = "navigation"
    FORMATION = "formation"
    TASK = "task"
    CONFIGURATION = "configuration"
    SAFETY = "safety"


class Scope(str, Enum):
    LOCAL = "local"
    GLOBAL = "global"


class Verb(str, Enum):
    MOVE_DIR = "move_dir"
    SET_FORMATION = "set_formation"
    SCALE_FORMATION = "scale_formation"
    START_SEARCH = "start_search"
    START_TRACK = "start_track"
    START_COVERAGE = "start_coverage"
    SET_GROUP_COUNT = "set_group_count"
    SET_PARAM = "set_param"
    SPLIT = "split"
    MERGE = "merge"
    HOLD = "hold"
    LAND = "land"
    EMERGENCY_STOP = "emergency_stop"
    SWITCH_MODE = "switch_mode"


# Local verbs are gated by their home mode; safety verbs and switch_mode
# are Global and valid everywhere.
VERB_MODE: dict[Verb, Mode] = {
    Verb.MOVE_DIR: Mode.NAVIGATION,
    Verb.SET_FORMATION: Mode.FORMATION,
    Verb.SCALE_FORMATION: Mode.FORMATION,
    Verb.START_SEARCH: Mode.TASK,
    Verb.START_TRACK: Mode.TASK,
    Verb.START_COVERAGE: Mode.TASK,
    Verb.SET_GROUP_COUNT: Mode.CONFIGURATION,
    Verb.SET_PARAM: Mode.CONFIGURATION,
    Verb.SPLIT: Mode.CONFIGURATION,
    Verb.MERGE: Mode.CONFIGURATION,
    Verb.HOLD: Mode.SAFETY,
    Verb.LAND: Mode.SAFETY,
    Verb.EMERGENCY_STOP: Mode.SAFETY,
    Verb.SWITCH_MODE: Mode.SAFETY,
}

GLOBAL_VERBS = {Verb.HOLD, Verb.LAND, Verb.EMERGENCY_STOP, Verb.SWITCH_MODE}


def scope_for(verb: Verb) -> Scope:
    return Scope.GLOBAL if verb in GLOBAL_VERBS else Scope.LOCAL


@dataclass
class Command:
    """One typed, prioritized directive.

    seq is strictly increasing per source stream; duplicates replayed on
    the same stream are ignored by dispatch.
    """

    verb: Verb
    mode: Mode
    scope: Scope
    args: dict[str, Any] = field(default_factory=dict)
    seq: int = 0
    issued_tick: int = 0
    source: str = "local"

    def to_payload(self) -> dict:
        return {
            "verb": self.verb.value,
            "mode": self.mode.value,
            "scope": self.scope.value,
            "args": self.args,
        }

    @classmethod
    def make(cls, verb: Verb | str, args: dict | None = None, *, seq: int = 0,
             source: str = "local", issued_tick: int = 0) -> "Command":
        verb = Verb(verb)
        return cls(
            verb=verb,
            mode=VERB_MODE[verb],
            scope=scope_for(verb),
            args=dict(args or {}),
            seq=seq,
            issued_tick=issued_tick,
            source=source,
        )

    @classmethod
    def from_payload(cls, payload: dict, *, seq: int = 0, source: str = "wire") -> "Command":
        verb = Verb(payload["verb"])
        mode = Mode(payload.get("mode", VERB_MODE[verb].value))
        scope = Scope(payload.get("scope", scope_for(verb).value))
        return cls(verb=verb, mode=mode, scope=scope, args=dict(payload.get("args", {})),
                   seq=seq, source=source)


@dataclass
class Echo:
    """Dispatch result surfaced to telemetry (Fig-style command feedback)."""

    seq: int
    verb: str
    status: str  # accepted | rejected | duplicate
    reason: str | None = None
    tick: int = 0

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "verb": self.verb,
            "status": self.status,
            "reason": self.reason,
            "tick": self.tick,
        }


@dataclass
class ControllerState:
    """Mode machine plus the group partition and per-group activity."""

    current_mode: Mode = Mode.NAVIGATION
    groups: dict[int, set[int]] = field(default_factory=dict)
    active_task: dict[int, Any] = field(default_factory=dict)
    transitions: dict[int, Any] = field(default_factory=dict)
    # None, or one of "hold" / "stop" / "land": overrides motion for the
    # whole swarm until cleared by a mode switch.
    safety_action: str | None = None
    migration_dir: np.ndarray | None = None
    param_overrides: dict[str, float] = field(default_factory=dict)
    last_echo: Echo | None = None
    echo_log: list[Echo] = field(default_factory=list)
    _seen_seq: dict[str, set[int]] = field(default_factory=dict)

    def all_uav_ids(self) -> set[int]:
        out: set[int] = set()
        for members in self.groups.values():
            out |= members
        return out

    def group_of(self, uav_id: int) -> int:
        for gid, members in self.groups.items():
            if uav_id in members:
                return gid
        raise KeyError(f"UAV {uav_id} is in no group")

    def assert_partition(self, uav_ids: set[int]) -> None:
        seen: set[int] = set()
        for gid, members in self.groups.items():
            if seen & members:
                raise AssertionError(f"group {gid} overlaps another group")
            seen |= members
        if seen != uav_ids:
            raise AssertionError("groups do not cover the UAV id set")


def _echo(state: ControllerState, cmd: Command, status: str, reason: str | None, tick: int) -> Echo:
    e = Echo(seq=cmd.seq, verb=cmd.verb.value, status=status, reason=reason, tick=tick)
    state.last_echo = e
    state.echo_log.append(e)
    if len(state.echo_log) > 256:
        del state.echo_log[:-256]
    return e


def dispatch(state: ControllerState, cmd: Command, engine=None) -> ControllerState:
    """Apply one command to the controller state.

    Global commands run regardless of current mode and cancel in-flight
    transition plans; Local commands run only when their mode matches.
    Duplicate (source, seq) pairs are ignored. Verbs that need world
    access (split, formations, tasks) delegate to the engine when given.
    """
    tick = engine.world.tick if engine is not None else 0
    seen = state._seen_seq.setdefault(cmd.source, set())
    if cmd.seq in seen:
        _echo(state, cmd, "duplicate", "seq already executed", tick)
        return state
    seen.add(cmd.seq)
    if len(seen) > 4096:
        state._seen_seq[cmd.source] = set(sorted(seen)[-2048:])
        seen = state._seen_seq[cmd.source]

    if cmd.scope is Scope.GLOBAL:
        _apply_global(state, cmd, engine)
        _echo(state, cmd, "accepted", None, tick)
        return state

    if cmd.mode is not state.current_mode:
        reason = f"mode mismatch: command is {cmd.mode.value}, controller in {state.current_mode.value}"
        _echo(state, cmd, "rejected", reason, tick)
        logger.info("rejected command %s: %s", cmd.verb.value, reason)
        return state

    try:
        _apply_local(state, cmd, engine)
    except (KeyError, ValueError) as exc:
        _echo(state, cmd, "rejected", str(exc), tick)
        logger.info("rejected command %s: %s", cmd.verb.value, exc)
        return state
    _echo(state, cmd, "accepted", None, tick)
    return state


def _apply_global(state: ControllerState, cmd: Command, engine) -> None:
    if cmd.verb is Verb.SWITCH_MODE:
        state.current_mode = Mode(cmd.args.get("mode", Mode.NAVIGATION.value))
        # Leaving (or re-entering) a mode clears any pause/stop override.
        state.safety_action = None
        return
    # Safety verbs preempt whatever was in flight.
    if engine is not None:
        engine.preempt_all()
    else:
        state.transitions.clear()
    if cmd.verb is Verb.EMERGENCY_STOP:
        state.safety_action = "stop"
        state.current_mode = Mode.SAFETY
    elif cmd.verb is Verb.LAND:
        state.safety_action = "land"
        state.current_mode = Mode.SAFETY
    elif cmd.verb is Verb.HOLD:
        state.safety_action = "hold"


def _apply_local(state: ControllerState, cmd: Command, engine) -> None:
    if cmd.verb is Verb.MOVE_DIR:
        d = np.asarray(cmd.args.get("direction", (0.0, 0.0, 0.0)), dtype=float)
        n = float(np.linalg.norm(d))
        state.migration_dir = None if n == 0.0 else d / n
    elif cmd.verb is Verb.SET_PARAM:
        path = cmd.args["path"]
        value = float(cmd.args["value"])
        if engine is not None:
            engine.set_param(path, value)
        state.param_overrides[path] = value
    elif cmd.verb in (Verb.SPLIT, Verb.SET_GROUP_COUNT):
        k = int(cmd.args.get("k", cmd.args.get("count", 3)))
        if engine is None:
            raise ValueError("split requires a running engine")
        split_groups(state, k, engine.world)
        engine.on_groups_changed()
    elif cmd.verb is Verb.MERGE:
        ids = [int(g) for g in cmd.args["groups"]]
        merge_groups(state, ids)
        if engine is not None:
            engine.on_groups_changed()
    elif engine is not None:
        # Formation and task verbs need world access; the engine owns them.
        engine.apply_command(cmd)
    else:
        raise ValueError(f"verb {cmd.verb.value} requires a running engine")


# --- grouping ---------------------------------------------------------------


def _kmeans(points: np.ndarray, k: int, iters: int = 100) -> np.ndarray:
    """Deterministic k-means: init by chunking the spatially sorted points.

    Ties in the nearest-centroid test resolve to the lowest centroid
    index, so the result is reproducible for identical input.
    """
    n = len(points)
    order = np.lexsort((points[:, 2], points[:, 1], points[:, 0]))
    chunks = np.array_split(order, k)
    centroids = np.array([points[c].mean(axis=0) for c in chunks])
    labels = None
    for _it in range(iters):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        for c in range(k):
            if not np.any(new_labels == c):
                # Re-seed an empty cluster with the point farthest from its
                # centroid (deterministic argmax).
                far = int(np.argmax(d2[np.arange(n), new_labels]))
                new_labels[far] = c
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centroids[c] = points[labels == c].mean(axis=0)
    return labels


def split_groups(state: ControllerState, k: int, world) -> ControllerState:
    """Repartition the swarm into k spatial groups (k-means on positions)."""
    n = len(world.uavs)
    if not 1 <= k <= n:
        raise ValueError(f"cannot split {n} UAVs into {k} groups")
    points = world.positions()
    labels = _kmeans(points, k)
    clusters: dict[int, set[int]] = {}
    for uav, lab in zip(world.uavs, labels):
        clusters.setdefault(int(lab), set()).add(uav.id)
    # Renumber groups 0..k-1 ordered by their lowest member id.
    ordered = sorted(clusters.values(), key=min)
    state.groups = {gid: members for gid, members in enumerate(ordered)}
    state.active_task = {}
    state.transitions = {}
    for gid, members in state.groups.items():
        for uav in world.uavs:
            if uav.id in members:
                uav.group_id = gid
    return state


def merge_groups(state: ControllerState, ids: list[int]) -> ControllerState:
    """Union the listed groups; the lowest group id survives."""
    for gid in ids:
        if gid not in state.groups:
            raise KeyError(f"unknown group id {gid}")
    if len(set(ids)) <= 1:
        return state
    keep = min(ids)
    merged: set[int] = set()
    for gid in set(ids):
        merged |= state.groups.pop(gid)
        state.active_task.pop(gid, None)
        state.transitions.pop(gid, None)
    state.groups[keep] = merged
    return state


def allocate_task(state: ControllerState, group_id: int, task) -> ControllerState:
    """Replace a group's active task; other groups are untouched.

    The superseded task's plan is discarded by the engine (it owns the
    per-group progress); the formation context stays.
    """
    if group_id not in state.groups:
        raise KeyError(f"unknown group id {group_id}")
    state.active_task[group_id] = task
    return state
