"""hgic: a gesture-steerable multi-UAV swarm control stack.

Deterministic point-mass swarm simulator with three-layer distributed
control (flocking reflexes, formation/task management, command
coordination), hand-keypoint gesture classifiers with decision fusion, a
JSON-over-UDP command/telemetry protocol, and a CLI harness.
"""

__version__ = "0.1.0"

from .world import MissionMetrics, SwarmWorld, UavState  # noqa: F401
