"""Tick loop wiring the three control layers together.

Each tick: drain the command inbox (scripted, network, gesture-derived, in
that order), compute per-UAV commanded velocities from the active layer
(safety override > task positioning > formation slot seeking > navigation
flocking), integrate, then update collision and spacing metrics and any
in-flight transition plans. The engine itself is single-threaded; network
feeders only touch the thread-safe inbox queues.
"""

from __future__ import annotations

import logging
import os
import queue
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .assignment import assign_slots
from .commands import Command, ControllerState, Mode, Verb, allocate_task, dispatch
from .flocking import FlockParams, combine_velocity, obstacle_avoidance_velocity
from .formation import FormationSpec, TransitionPlan, group_spacing_error, switch_formation
from .scenario import Scenario, build_world
from .tasks import (
    CoverageTask,
    Rect,
    SearchTask,
    TrackTask,
    lloyd_step,
    plan_area_search,
    standoff_slots,
    update_tracking,
)
from .trajlog import TrajectoryWriter, write_metrics
from .world import detect_collisions, step_world

logger = logging.getLogger(__name__)

LAND_SPEED = 2.0
COVERAGE_REFRESH_TICKS = 10


@dataclass
class SearchProgress:
    task: SearchTask
    waypoints: list[np.ndarray]
    index: int = 0
    centroid: np.ndarray = field(default_factory=lambda: np.zeros(3))


@dataclass
class TrackProgress:
    task: TrackTask
    latched: bool = False
    assignment: list[int] | None = None


@dataclass
class CoverageProgress:
    task: CoverageTask
    altitude: float = 30.0
    targets: dict[int, np.ndarray] = field(default_factory=dict)
    converged: bool = False


class SimulationEngine:
    """Owns the world, the controller state, and the per-group activity."""

    def __init__(self, scenario: Scenario, recognizer=None):
        self.scenario = scenario
        self.world = build_world(scenario)
        self.flock = scenario.flocking
        self.k_f = 1.2
        self.state = ControllerState(current_mode=scenario.initial_mode)
        self.state.groups = {0: {u.id for u in self.world.uavs}}
        self.recognizer = recognizer
        self.net_inbox: "queue.Queue[Command]" = queue.Queue(maxsize=256)
        self.keypoint_inbox: "queue.Queue" = queue.Queue(maxsize=1024)
        self.transition_log: list[dict] = []
        self._scripted = list(scenario.commands)
        self._script_pos = 0
        self._gesture_seq = 0
        self._progress: dict[int, object] = {}
        if scenario.formation is not None:
            self._start_transition(0, scenario.formation)

    # --- command intake ------------------------------------------------------

    def submit(self, cmd: Command) -> None:
        """Queue a command from a network feeder; Global is never dropped."""
        try:
            self.net_inbox.put_nowait(cmd)
        except queue.Full:
            backlog = []
            dropped = False
            while True:
                try:
                    c = self.net_inbox.get_nowait()
                except queue.Empty:
                    break
                if not dropped and c.scope.value == "local":
                    dropped = True
                    continue
                backlog.append(c)
            if not dropped and cmd.scope.value == "local":
                # Queue full of Global commands: the incoming Local one loses.
                for c in backlog:
                    self.net_inbox.put_nowait(c)
                return
            for c in backlog:
                self.net_inbox.put_nowait(c)
            self.net_inbox.put_nowait(cmd)

    def _drain_inbox(self) -> None:
        while self._script_pos < len(self._scripted) and (
            self._scripted[self._script_pos].issued_tick <= self.world.tick
        ):
            cmd = self._scripted[self._script_pos]
            self._script_pos += 1
            dispatch(self.state, cmd, self)
        while True:
            try:
                cmd = self.net_inbox.get_nowait()
            except queue.Empty:
                break
            cmd.issued_tick = self.world.tick
            dispatch(self.state, cmd, self)
        if self.recognizer is not None:
            while True:
                try:
                    frame = self.keypoint_inbox.get_nowait()
                except queue.Empty:
                    break
                for cmd in self.recognizer.ingest(frame, self.state.current_mode):
                    self._gesture_seq += 1
                    cmd.seq = self._gesture_seq
                    cmd.source = "gesture"
                    cmd.issued_tick = self.world.tick
                    dispatch(self.state, cmd, self)

    # --- dispatch callbacks ---------------------------------------------------

    def set_param(self, path: str, value: float) -> None:
        """Runtime-tunable gains: flocking.<field>, formation.k_f, limits.<field>."""
        section, _, name = path.partition(".")
        if section == "flocking" and name in FlockParams.__dataclass_fields__:
            setattr(self.flock, name, float(value))
        elif section == "formation" and name == "k_f":
            self.k_f = float(value)
        elif section == "limits" and name in ("v_max", "a_max", "d_col"):
            setattr(self.world.limits, name, float(value))
        else:
            raise ValueError(f"unknown parameter path {path!r}")

    def preempt_all(self) -> None:
        """Safety preemption: cancel every transition plan and task plan."""
        self.state.transitions.clear()
        self._progress.clear()

    def apply_command(self, cmd: Command) -> None:
        """Mode-local verbs that need world access (dispatch delegates here)."""
        if cmd.verb is Verb.SET_FORMATION:
            for gid in self._target_groups(cmd, default_all=True):
                self._set_formation(gid, cmd.args)
        elif cmd.verb is Verb.SCALE_FORMATION:
            factor = float(cmd.args.get("factor", 1.5))
            if factor <= 0:
                raise ValueError("scale factor must be positive")
            for gid in self._target_groups(cmd, default_all=True):
                plan = self.state.transitions.get(gid)
                if plan is None:
                    continue
                self._start_transition(gid, replace(plan.spec, scale=plan.spec.scale * factor))
        elif cmd.verb is Verb.START_SEARCH:
            for gid in self._target_groups(cmd):
                self._start_search(gid, cmd.args)
        elif cmd.verb is Verb.START_TRACK:
            for gid in self._target_groups(cmd):
                self._start_track(gid, cmd.args)
        elif cmd.verb is Verb.START_COVERAGE:
            for gid in self._target_groups(cmd):
                self._start_coverage(gid, cmd.args)
        else:
            raise ValueError(f"verb {cmd.verb.value} is not an engine command")

    def _target_groups(self, cmd: Command, default_all: bool = False) -> list[int]:
        if "group" in cmd.args:
            gid = int(cmd.args["group"])
            if gid not in self.state.groups:
                raise KeyError(f"unknown group id {gid}")
            return [gid]
        if default_all:
            return sorted(self.state.groups)
        return [min(self.state.groups)]

    # --- per-group activity ----------------------------------------------------

    def _group_centroid(self, gid: int) -> np.ndarray:
        members = sorted(self.state.groups[gid])
        return np.mean([self.world.uav_by_id(i).position for i in members], axis=0)

    def _start_transition(self, gid: int, spec: FormationSpec) -> None:
        members = sorted(self.state.groups[gid])
        spec = replace(spec, count=len(members))
        old = self.state.transitions.get(gid)
        plan = switch_formation(self.world, members, spec)
        self.state.transitions[gid] = plan
        self.transition_log.append(
            {
                "group": gid,
                "from": old.spec.kind.value if old else None,
                "to": spec.kind.value,
                "start_tick": self.world.tick,
                "start_t": self.world.tick * self.world.dt,
                "completed": False,
                "duration_s": None,
            }
        )

    def _set_formation(self, gid: int, args: dict) -> None:
        old = self.state.transitions.get(gid)
        center = np.asarray(
            args.get("center", old.spec.center if old else self._group_centroid(gid)),
            dtype=float,
        )
        spec = FormationSpec(
            kind=args.get("kind", old.spec.kind.value if old else "circle"),
            center=center,
            heading=float(args.get("heading", old.spec.heading if old else 0.0)),
            scale=float(args.get("scale", old.spec.scale if old else 10.0)),
            count=len(self.state.groups[gid]),
        )
        self._start_transition(gid, spec)

    def _start_search(self, gid: int, args: dict) -> None:
        centroid = self._group_centroid(gid)
        center = np.asarray(args.get("center", centroid), dtype=float)
        plan = self.state.transitions.get(gid)
        formation = plan.spec if plan else FormationSpec(
            kind="circle", center=centroid, scale=8.0, count=len(self.state.groups[gid])
        )
        task = SearchTask(
            center=center,
            radius=float(args.get("radius", 60.0)),
            lane_spacing=float(args.get("lane_spacing", 20.0)),
            formation=formation,
        )
        if plan is None:
            self._start_transition(gid, formation)
        allocate_task(self.state, gid, task)
        self._progress[gid] = SearchProgress(
            task=task, waypoints=plan_area_search(task), centroid=centroid.copy()
        )

    def _start_track(self, gid: int, args: dict) -> None:
        target_id = int(args["target_id"])
        self.world.uav_by_id(target_id)  # raises KeyError for unknown ids
        task = TrackTask(
            target_id=target_id,
            perception_range=float(args.get("perception_range", 150.0)),
            standoff_radius=float(args.get("standoff_radius", 10.0)),
        )
        allocate_task(self.state, gid, task)
        self._progress[gid] = TrackProgress(task=task)

    def _start_coverage(self, gid: int, args: dict) -> None:
        lo, hi = self.world.region.lo, self.world.region.hi
        r = args.get("region", [lo[0], lo[1], hi[0], hi[1]])
        task = CoverageTask(
            region=Rect(float(r[0]), float(r[1]), float(r[2]), float(r[3])),
            tolerance=float(args.get("tolerance", 0.5)),
            max_iters=int(args.get("max_iters", 200)),
        )
        allocate_task(self.state, gid, task)
        self._progress[gid] = CoverageProgress(task=task, altitude=float(self._group_centroid(gid)[2]))

    def on_groups_changed(self) -> None:
        """After split/merge: re-sync UAV group ids, rebuild changed formations."""
        for gid, members in self.state.groups.items():
            for uav_id in members:
                self.world.uav_by_id(uav_id).group_id = gid
        self._progress = {g: p for g, p in self._progress.items() if g in self.state.groups}
        base = self.scenario.formation
        for gid in sorted(self.state.groups):
            plan = self.state.transitions.get(gid)
            if plan is not None and plan.spec.count == len(self.state.groups[gid]):
                continue
            self._progress.pop(gid, None)
            self._start_transition(
                gid,
                FormationSpec(
                    kind=base.kind.value if base else "circle",
                    center=self._group_centroid(gid),
                    heading=base.heading if base else 0.0,
                    scale=base.scale if base else 10.0,
                    count=len(self.state.groups[gid]),
                ),
            )

    # --- control stack -----------------------------------------------------

    def control_velocities(self) -> tuple[np.ndarray, np.ndarray | None]:
        """Commanded velocity per UAV plus the acceleration-bypass mask."""
        n = len(self.world.uavs)
        cmds = np.zeros((n, 3))
        if self.state.safety_action == "stop":
            # Emergency stop is idealized maximal braking: the zero command
            # applies directly, bypassing the acceleration limit.
            return cmds, np.ones(n, dtype=bool)

        if self.state.safety_action == "land":
            floor = self.world.region.lo[2]
            for i, u in enumerate(self.world.uavs):
                if u.position[2] > floor + 0.1:
                    cmds[i] = (0.0, 0.0, -LAND_SPEED)
            return cmds, None

        if self.state.safety_action == "hold":
            return cmds, None

        self._advance_tasks()
        ids = np.array([u.id for u in self.world.uavs], dtype=np.int64)
        sep, coh, ali, rep = kernels.flock_terms(
            self.world.positions(), self.world.velocities(), ids, self.world.group_ids(), self.flock
        )
        v_max = self.world.limits.v_max
        index_of = {u.id: i for i, u in enumerate(self.world.uavs)}
        migrating = (
            self.state.migration_dir is not None and self.state.current_mode is Mode.NAVIGATION
        )
        for gid, members in sorted(self.state.groups.items()):
            plan = self.state.transitions.get(gid)
            progress = self._progress.get(gid)
            for uav_id in sorted(members):
                i = index_of[uav_id]
                u = self.world.uavs[i]
                seek = self._seek_term(u, gid, plan, progress)
                if seek is not None:
                    terms = [seek, rep[i]]
                elif migrating:
                    terms = [
                        self.flock.v_mig * self.state.migration_dir,
                        sep[i],
                        coh[i],
                        ali[i],
                        rep[i],
                    ]
                else:
                    terms = [rep[i]]
                if self.world.obstacles:
                    terms.append(obstacle_avoidance_velocity(u, self.world.obstacles, self.flock))
                cmds[i] = combine_velocity(terms, v_max)
        return cmds, None

    def _seek_term(self, uav, gid, plan, progress) -> np.ndarray | None:
        if isinstance(progress, TrackProgress) and progress.latched:
            if uav.id == progress.task.target_id:
                return None
            target = self.world.uav_by_id(progress.task.target_id)
            members = [m for m in sorted(self.state.groups[gid]) if m != progress.task.target_id]
            slots = standoff_slots(target.position, progress.task.standoff_radius, len(members))
            return self.k_f * (slots[progress.assignment[members.index(uav.id)]] - uav.position)
        if isinstance(progress, CoverageProgress) and progress.targets:
            target = progress.targets.get(uav.id)
            return None if target is None else self.k_f * (target - uav.position)
        if plan is not None:
            return self.k_f * (plan.slot_for(uav.id) - uav.position)
        return None

    def _advance_tasks(self) -> None:
        for gid in sorted(self.state.groups):
            progress = self._progress.get(gid)
            if isinstance(progress, SearchProgress):
                self._advance_search(gid, progress)
            elif isinstance(progress, TrackProgress):
                self._advance_track(gid, progress)
            elif isinstance(progress, CoverageProgress):
                self._advance_coverage(gid, progress)

    def _advance_search(self, gid: int, progress: SearchProgress) -> None:
        plan = self.state.transitions.get(gid)
        if plan is None or progress.index >= len(progress.waypoints):
            return
        wp = progress.waypoints[progress.index]
        to_wp = wp - progress.centroid
        dist = float(np.linalg.norm(to_wp))
        step = self.flock.v_mig * self.world.dt
        if dist <= max(step, 0.5):
            progress.centroid = wp.copy()
            progress.index += 1
        else:
            progress.centroid = progress.centroid + to_wp * (step / dist)
        plan.recenter(progress.centroid)

    def _advance_track(self, gid: int, progress: TrackProgress) -> None:
        if progress.latched:
            return
        target = self.world.uav_by_id(progress.task.target_id)
        members = [m for m in sorted(self.state.groups[gid]) if m != progress.task.target_id]
        trackers = [self.world.uav_by_id(m) for m in members]
        if not trackers:
            return
        desired = update_tracking(trackers, target, progress.task)
        if desired is None:
            return
        # Detection broadcast: the whole group latches in this same tick.
        progress.latched = True
        slots = standoff_slots(target.position, progress.task.standoff_radius, len(trackers))
        progress.assignment = assign_slots([t.position for t in trackers], slots)

    def _advance_coverage(self, gid: int, progress: CoverageProgress) -> None:
        if progress.converged:
            return
        if progress.targets and self.world.tick % COVERAGE_REFRESH_TICKS != 0:
            return
        members = sorted(self.state.groups[gid])
        sites = np.array([self.world.uav_by_id(m).position[:2] for m in members], dtype=float)
        new_sites = lloyd_step(sites, progress.task.region)
        moved = float(np.max(np.linalg.norm(new_sites - sites, axis=1)))
        if progress.targets and moved < progress.task.tolerance:
            progress.converged = True
        progress.targets = {
            m: np.array([new_sites[k][0], new_sites[k][1], progress.altitude])
            for k, m in enumerate(members)
        }

    # --- tick loop ----------------------------------------------------------

    def step(self) -> None:
        self._drain_inbox()
        cmds, override = self.control_velocities()
        step_world(self.world, cmds, override)
        detect_collisions(self.world, self.world.limits.d_col)
        self._record_spacing()

    def _record_spacing(self) -> None:
        errors: list[tuple[int, float]] = []
        for gid in sorted(self.state.transitions):
            progress = self._progress.get(gid)
            if isinstance(progress, TrackProgress) and progress.latched:
                continue  # positioned by the task, not the formation
            if isinstance(progress, CoverageProgress) and progress.targets:
                continue
            plan = self.state.transitions[gid]
            err = group_spacing_error(self.world, plan)
            errors.append((len(plan.uav_ids), err))
            was_complete = plan.complete
            plan.update(err, self.world.tick)
            if plan.complete and not was_complete:
                for entry in reversed(self.transition_log):
                    if entry["group"] == gid and not entry["completed"]:
                        entry["completed"] = True
                        entry["duration_s"] = (self.world.tick - entry["start_tick"]) * self.world.dt
                        break
        if errors:
            total = sum(n for n, _ in errors)
            self.world.metrics.spacing_error_series.append(sum(n * e for n, e in errors) / total)

    def run(
        self,
        out_dir,
        live: bool = False,
        rate_hz: float = 10.0,
        publisher=None,
        speed: float = 1.0,
        stop_event=None,
    ) -> dict:
        """Run the scenario to completion; returns the metrics summary."""
        os.makedirs(out_dir, exist_ok=True)
        traj_path = os.path.join(out_dir, self.scenario.trajectory_name)
        metrics_path = os.path.join(out_dir, self.scenario.metrics_name)
        telemetry_every = max(1, int(round(1.0 / (rate_hz * self.world.dt))))
        started = time.monotonic()
        with TrajectoryWriter(traj_path) as writer:
            writer.write_tick(self.world)
            for k in range(self.scenario.total_ticks):
                if stop_event is not None and stop_event.is_set():
                    break
                self.step()
                writer.write_tick(self.world)
                if publisher is not None and self.world.tick % telemetry_every == 0:
                    publisher(self)
                if live:
                    target = started + (k + 1) * self.world.dt / speed
                    delay = target - time.monotonic()
                    if delay > 0:
                        time.sleep(delay)
        metrics = self.world.metrics.summary()
        metrics["scenario"] = self.scenario.name
        metrics["seed"] = self.scenario.seed
        metrics["kernel_backend"] = kernels.BACKEND
        metrics["transitions"] = self.transition_log
        metrics["runtime_s"] = time.monotonic() - started
        write_metrics(metrics_path, metrics)
        logger.info("scenario %s finished: %s", self.scenario.name, metrics_path)
        return metrics
