"""Scenario files: world setup plus a scripted command timeline."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from .commands import Command, Mode, Scope, Verb, VERB_MODE, scope_for
from .flocking import FlockParams
from .formation import FormationSpec
from .geom import vec3
from .world import Box, MotionLimits, Obstacle, SwarmWorld, UavState


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    name: str
    uav_count: int
    duration_s: float
    seed: int = 0
    dt: float = 0.02
    region: Box = field(default_factory=lambda: Box(vec3(-500, -500, 0), vec3(500, 500, 200)))
    placement: dict = field(default_factory=lambda: {"kind": "grid"})
    obstacles: list[Obstacle] = field(default_factory=list)
    limits: MotionLimits = field(default_factory=MotionLimits)
    flocking: FlockParams = field(default_factory=FlockParams)
    formation: FormationSpec | None = None
    initial_mode: Mode = Mode.NAVIGATION
    commands: list[Command] = field(default_factory=list)
    trajectory_name: str = "trajectory.csv"
    metrics_name: str = "metrics.json"

    @property
    def total_ticks(self) -> int:
        return int(round(self.duration_s / self.dt))


def _scenario_schema() -> dict:
    with resources.files("hgic.data.schemas").joinpath("scenario.schema.json").open() as f:
        return json.load(f)


def load_scenario(path, seed_override: int | None = None) -> Scenario:
    """Parse and validate a scenario file.

    Raises:
        ScenarioError: malformed JSON, schema violation, or scripted
            command ticks outside the run duration.
    """
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from exc
    return parse_scenario(doc, origin=str(path), seed_override=seed_override)


def parse_scenario(doc: dict, origin: str = "<scenario>", seed_override: int | None = None) -> Scenario:
    try:
        jsonschema.validate(doc, _scenario_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path)
        raise ScenarioError(f"{origin}: at /{where}: {exc.message}") from exc

    region = Box(
        np.asarray(doc.get("region", {}).get("min", (-500, -500, 0)), dtype=float),
        np.asarray(doc.get("region", {}).get("max", (500, 500, 200)), dtype=float),
    )
    if not np.all(region.hi > region.lo):
        raise ScenarioError(f"{origin}: region max must exceed region min componentwise")

    try:
        flocking = FlockParams.from_dict(doc.get("flocking", {})) if doc.get("flocking") else FlockParams()
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{origin}: bad flocking params: {exc}") from exc

    formation = None
    if "formation" in doc:
        fdoc = dict(doc["formation"])
        fdoc.setdefault("count", doc["uav_count"])
        formation = FormationSpec.from_dict(fdoc)

    scenario = Scenario(
        name=doc["name"],
        uav_count=doc["uav_count"],
        duration_s=float(doc["duration_s"]),
        seed=seed_override if seed_override is not None else int(doc.get("seed", 0)),
        dt=float(doc.get("dt", 0.02)),
        region=region,
        placement=dict(doc.get("placement", {"kind": "grid"})),
        obstacles=[
            Obstacle(np.asarray(o["center"], dtype=float), float(o["radius"]))
            for o in doc.get("obstacles", [])
        ],
        limits=MotionLimits(**doc.get("limits", {})),
        flocking=flocking,
        formation=formation,
        initial_mode=Mode(doc.get("initial_mode", "navigation")),
        trajectory_name=doc.get("outputs", {}).get("trajectory", "trajectory.csv"),
        metrics_name=doc.get("outputs", {}).get("metrics", "metrics.json"),
    )

    total = scenario.total_ticks
    for i, cdoc in enumerate(doc.get("commands", [])):
        if cdoc["tick"] >= total:
            raise ScenarioError(
                f"{origin}: commands[{i}] scheduled at tick {cdoc['tick']} "
                f"but the run is only {total} ticks"
            )
        try:
            verb = Verb(cdoc["verb"])
        except ValueError:
            raise ScenarioError(f"{origin}: commands[{i}]: unknown verb {cdoc['verb']!r}") from None
        cmd = Command(
            verb=verb,
            mode=Mode(cdoc["mode"]) if "mode" in cdoc else VERB_MODE[verb],
            scope=Scope(cdoc["scope"]) if "scope" in cdoc else scope_for(verb),
            args=dict(cdoc.get("args", {})),
            seq=i + 1,
            issued_tick=cdoc["tick"],
            source="script",
        )
        scenario.commands.append(cmd)
    scenario.commands.sort(key=lambda c: (c.issued_tick, c.seq))
    return scenario


def build_world(scenario: Scenario) -> SwarmWorld:
    """Instantiate the world with the scenario's initial placement."""
    n = scenario.uav_count
    kind = scenario.placement.get("kind", "grid")
    center = np.asarray(scenario.placement.get("center", (0.0, 0.0, 30.0)), dtype=float)
    positions: list[np.ndarray] = []
    if kind == "grid":
        spacing = float(scenario.placement.get("spacing", 5.0))
        cols = math.ceil(math.sqrt(n))
        rows = math.ceil(n / cols)
        for i in range(n):
            r, c = divmod(i, cols)
            positions.append(
                center
                + np.array(
                    [(c - (cols - 1) / 2.0) * spacing, (r - (rows - 1) / 2.0) * spacing, 0.0]
                )
            )
    elif kind == "circle":
        radius = float(scenario.placement.get("radius", 10.0))
        heading = float(scenario.placement.get("heading", 0.0))
        for i in range(n):
            a = heading + 2.0 * math.pi * i / n
            positions.append(center + radius * np.array([math.cos(a), math.sin(a), 0.0]))
    elif kind == "line":
        spacing = float(scenario.placement.get("spacing", 5.0))
        heading = float(scenario.placement.get("heading", 0.0))
        u = np.array([-math.sin(heading), math.cos(heading), 0.0])
        for i in range(n):
            positions.append(center + (i - (n - 1) / 2.0) * spacing * u)
    elif kind == "random":
        spread = float(scenario.placement.get("spread", 30.0))
        rng = np.random.default_rng(scenario.seed)
        for _ in range(n):
            offset = rng.uniform(-spread, spread, size=3)
            offset[2] = rng.uniform(-spread / 4.0, spread / 4.0)
            positions.append(center + offset)
    else:
        raise ScenarioError(f"unknown placement kind {kind!r}")

    lo, hi = scenario.region.lo, scenario.region.hi
    uavs = [
        UavState(id=i, position=np.clip(p, lo, hi), velocity=np.zeros(3))
        for i, p in enumerate(positions)
    ]
    return SwarmWorld(
        uavs=uavs,
        obstacles=list(scenario.obstacles),
        region=scenario.region,
        dt=scenario.dt,
        rng_seed=scenario.seed,
        limits=scenario.limits,
    )
