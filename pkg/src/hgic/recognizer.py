"""Live keypoint-to-command pipeline: classify, fuse, convert.

Incoming frames fill a sliding window. A window with real fingertip travel
is classified as a dynamic gesture; otherwise the newest frame goes to the
static classifier. Observations stream through the fusion buffer and fused
decisions are converted against the mapping rules in the controller's
current mode.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

from .commands import Command, Mode
from .converter import MappingRules, convert
from .fusion import FusionBuffer, FusionConfig
from .gesture.features import (
    DYNAMIC_WINDOW,
    GestureKind,
    GestureObservation,
    KeypointFrame,
    fingertip_travel,
    normalize_dynamic,
    normalize_static,
)
from .gesture.mlp import ClassifierModel, forward

logger = logging.getLogger(__name__)

# Fingertip travel (image units) past which a window counts as motion.
MOTION_THRESHOLD = 0.08


@dataclass
class RecognizerStats:
    frames: int = 0
    observations: int = 0
    last_label: str | None = None
    last_decision: str | None = None
    last_decision_frame: int | None = None
    commands_emitted: int = 0


@dataclass
class GestureRecognizer:
    static_model: ClassifierModel
    rules: MappingRules
    dynamic_model: ClassifierModel | None = None
    fusion: FusionBuffer = field(default_factory=lambda: FusionBuffer(FusionConfig()))
    stats: RecognizerStats = field(default_factory=RecognizerStats)
    _window: deque = field(default_factory=lambda: deque(maxlen=DYNAMIC_WINDOW))

    def ingest(self, frame: KeypointFrame, current_mode: Mode) -> list[Command]:
        """Process one frame; returns converted commands (usually none)."""
        self.stats.frames += 1
        self._window.append(frame)
        obs = self._classify(frame)
        if obs is None:
            return []
        self.stats.observations += 1
        self.stats.last_label = obs.label
        self.fusion.push(obs)
        decision = self.fusion.fuse()
        if decision is None:
            return []
        self.stats.last_decision = decision.label
        self.stats.last_decision_frame = decision.frame_index
        cmd = convert(decision.label, current_mode, self.rules)
        if cmd is None:
            return []
        self.stats.commands_emitted += 1
        logger.info("gesture %r -> %s", decision.label, cmd.verb.value)
        return [cmd]

    def _classify(self, frame: KeypointFrame) -> GestureObservation | None:
        if (
            self.dynamic_model is not None
            and len(self._window) == DYNAMIC_WINDOW
            and fingertip_travel(list(self._window)) >= MOTION_THRESHOLD
        ):
            feats = normalize_dynamic(list(self._window))
            probs = forward(self.dynamic_model, feats)
            idx = int(probs.argmax())
            return GestureObservation(
                label=self.dynamic_model.labels[idx],
                confidence=float(probs[idx]) * frame.detection_confidence,
                frame_index=frame.frame_index,
                kind=GestureKind.DYNAMIC,
            )
        feats = normalize_static(frame)
        probs = forward(self.static_model, feats)
        idx = int(probs.argmax())
        return GestureObservation(
            label=self.static_model.labels[idx],
            confidence=float(probs[idx]) * frame.detection_confidence,
            frame_index=frame.frame_index,
            kind=GestureKind.STATIC,
        )

    def telemetry_stats(self, frame_index: int | None = None) -> dict:
        current = frame_index if frame_index is not None else self.stats.frames
        return {
            "last_label": self.stats.last_decision,
            "last_frame": self.stats.last_decision_frame,
            "cooldown": self.fusion.cooldown_remaining(current),
            "rejected": self.fusion.rejected_low_confidence + self.fusion.rejected_blank,
        }
