"""Decision fusion: confidence-gated buffering with recency weighting.

Per-frame classifier outputs accumulate in a fixed-capacity buffer; only
observations at or above the confidence threshold P are admitted. When the
buffer fills (N accepted observations) the per-label recency-weighted
scores are aggregated, the winning label is emitted, the buffer clears,
and a blank period of F frames rejects everything — so two consecutive
decisions are always more than F frames apart.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .gesture.features import GestureObservation


@dataclass
class FusionConfig:
    confidence_threshold: float = 0.9  # P
    buffer_size: int = 20  # N
    blank_frames: int = 50  # F

    def __post_init__(self) -> None:
        if not 0.0 < self.confidence_threshold <= 1.0:
            raise ValueError("confidence threshold must lie in (0, 1]")
        if self.buffer_size < 1:
            raise ValueError("buffer size must be at least 1")
        if self.blank_frames < 0:
            raise ValueError("blank period cannot be negative")


@dataclass
class Decision:
    label: str
    frame_index: int
    score: float


@dataclass
class FusionBuffer:
    config: FusionConfig = field(default_factory=FusionConfig)
    rejected_low_confidence: int = 0
    rejected_blank: int = 0
    decisions: list[Decision] = field(default_factory=list)
    _items: deque = field(default_factory=deque)
    _blank_until: int = -1

    def __post_init__(self) -> None:
        self._items = deque(self._items, maxlen=self.config.buffer_size)

    def __len__(self) -> int:
        return len(self._items)

    def cooldown_remaining(self, frame_index: int) -> int:
        return max(0, self._blank_until - frame_index)

    def push(self, obs: GestureObservation) -> bool:
        """Admit one observation; returns False for rejections.

        Rejections (below-threshold confidence, or inside the blank
        period) are counted, never raised.
        """
        if obs.frame_index <= self._blank_until:
            self.rejected_blank += 1
            return False
        if obs.confidence < self.config.confidence_threshold:
            self.rejected_low_confidence += 1
            return False
        self._items.append(obs)
        return True

    def fuse(self) -> Decision | None:
        """Aggregate a full buffer into one decision; None when not full.

        Position k (oldest first) weighs (k+1)/N, so the newest entry
        weighs 1. Score ties break toward the label seen most recently.
        Emitting clears the buffer and starts the blank period.
        """
        n = self.config.buffer_size
        if len(self._items) < n:
            return None
        scores: dict[str, float] = {}
        last_seen: dict[str, int] = {}
        for k, obs in enumerate(self._items):
            scores[obs.label] = scores.get(obs.label, 0.0) + (k + 1) / n
            last_seen[obs.label] = k
        winner = max(scores, key=lambda lab: (scores[lab], last_seen[lab]))
        decided_at = self._items[-1].frame_index
        decision = Decision(label=winner, frame_index=decided_at, score=scores[winner])
        self.decisions.append(decision)
        self._items.clear()
        self._blank_until = decided_at + self.config.blank_frames
        return decision
