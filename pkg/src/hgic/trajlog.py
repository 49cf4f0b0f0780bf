"""Trajectory CSV and metrics JSON output, plus log-side metric recomputation.

One CSV row per (tick, uav): tick,t,id,x,y,z,vx,vy,vz,group. Floats are
written with repr (shortest round-trip), so identical runs produce
byte-identical logs.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

HEADER = ["tick", "t", "id", "x", "y", "z", "vx", "vy", "vz", "group"]


class TrajectoryWriter:
    def __init__(self, path):
        self._f = open(path, "w", newline="")
        self._w = csv.writer(self._f)
        self._w.writerow(HEADER)

    def write_tick(self, world) -> None:
        t = world.tick * world.dt
        for u in world.uavs:
            self._w.writerow(
                [world.tick, repr(t), u.id]
                + [repr(float(v)) for v in u.position]
                + [repr(float(v)) for v in u.velocity]
                + [u.group_id]
            )

    def close(self) -> None:
        self._f.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class LogRow:
    tick: int
    t: float
    id: int
    position: tuple[float, float, float]
    velocity: tuple[float, float, float]
    group: int


def read_trajectory(path) -> list[LogRow]:
    rows: list[LogRow] = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != HEADER:
            raise ValueError(f"{path}: not a trajectory log (header {header})")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(HEADER)} columns")
            rows.append(
                LogRow(
                    tick=int(row[0]),
                    t=float(row[1]),
                    id=int(row[2]),
                    position=(float(row[3]), float(row[4]), float(row[5])),
                    velocity=(float(row[6]), float(row[7]), float(row[8])),
                    group=int(row[9]),
                )
            )
    if not rows:
        raise ValueError(f"{path}: trajectory log is empty")
    return rows


def recompute_metrics(rows: list[LogRow], d_col: float = 1.0) -> dict:
    """Rebuild the run metrics from a trajectory log.

    Collision events are re-detected with the same edge-triggered pairwise
    rule the simulator uses.
    """
    by_tick: dict[int, list[LogRow]] = {}
    for r in rows:
        by_tick.setdefault(r.tick, []).append(r)
    ticks = sorted(by_tick)
    collisions = 0
    below_prev: set[tuple[int, int]] = set()
    speed_means: list[float] = []
    speed_max = 0.0
    for tick in ticks:
        group = by_tick[tick]
        if tick == ticks[0]:
            # The first logged tick is the pre-step placement: the live run
            # records speeds and detects collisions only after integration
            # steps, starting from an empty pair state.
            continue
        speeds = [math.sqrt(r.velocity[0] ** 2 + r.velocity[1] ** 2 + r.velocity[2] ** 2) for r in group]
        speed_means.append(sum(speeds) / len(speeds))
        speed_max = max(speed_max, max(speeds))
        below: set[tuple[int, int]] = set()
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                dx = group[i].position[0] - group[j].position[0]
                dy = group[i].position[1] - group[j].position[1]
                dz = group[i].position[2] - group[j].position[2]
                if dx * dx + dy * dy + dz * dz < d_col * d_col:
                    a, b = group[i].id, group[j].id
                    below.add((a, b) if a < b else (b, a))
        collisions += len(below - below_prev)
        below_prev = below
    duration = by_tick[ticks[-1]][0].t - by_tick[ticks[0]][0].t
    return {
        "duration_s": duration,
        "max_velocity": speed_max,
        "avg_velocity": sum(speed_means) / len(speed_means) if speed_means else 0.0,
        "collisions": collisions,
        "ticks": len(ticks),
        "uavs": len(by_tick[ticks[0]]),
    }


def write_metrics(path, metrics: dict) -> None:
    with open(path, "w") as f:
        json.dump(metrics, f, indent=2, sort_keys=True)
        f.write("\n")
