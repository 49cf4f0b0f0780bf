"""Hand keypoint frames and feature normalization for the classifiers.

Frames carry 21 (x, y) landmarks in normalized image coordinates. Static
features are wrist-anchored and scale-normalized (translation and uniform
scaling of the hand do not change them). Dynamic features track the index
fingertip across a fixed-length frame window, anchored to the first frame.
Rotation is deliberately NOT normalized away: orientation is what makes
directional gestures distinct.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

N_KEYPOINTS = 21
WRIST = 0
INDEX_FINGERTIP = 8
DYNAMIC_WINDOW = 16


class GestureKind(str, Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


@dataclass
class KeypointFrame:
    """One camera frame's hand skeleton."""

    frame_index: int
    points: np.ndarray  # (21, 2) in [0, 1]
    detection_confidence: float = 1.0

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if self.points.shape != (N_KEYPOINTS, 2):
            raise ValueError(f"expected {N_KEYPOINTS} keypoints, got {self.points.shape}")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("keypoints must be finite")

    def to_dict(self) -> dict:
        return {
            "frame_index": self.frame_index,
            "points": [[float(x), float(y)] for x, y in self.points],
            "confidence": float(self.detection_confidence),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KeypointFrame":
        return cls(
            frame_index=int(d["frame_index"]),
            points=np.asarray(d["points"], dtype=float),
            detection_confidence=float(d.get("confidence", 1.0)),
        )


@dataclass
class GestureObservation:
    """One classifier output fed to decision fusion."""

    label: str
    confidence: float
    frame_index: int
    kind: GestureKind = GestureKind.STATIC

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")


def normalize_static(frame: KeypointFrame) -> np.ndarray:
    """42 features: wrist-pinned, scaled by the largest |coordinate|.

    A fully degenerate frame (all points on the wrist) maps to the zero
    vector rather than dividing by zero.
    """
    pts = frame.points - frame.points[WRIST]
    m = float(np.abs(pts).max())
    if m == 0.0:
        return np.zeros(2 * N_KEYPOINTS)
    return (pts / m).reshape(-1)


def normalize_dynamic(history: list[KeypointFrame]) -> np.ndarray:
    """2T features from the index fingertip track across a T-frame window.

    The track is anchored to the first frame and scaled by the maximum
    absolute displacement; a stationary fingertip maps to the zero vector.
    """
    if len(history) != DYNAMIC_WINDOW:
        raise ValueError(f"dynamic window is {DYNAMIC_WINDOW} frames, got {len(history)}")
    track = np.array([f.points[INDEX_FINGERTIP] for f in history])
    track = track - track[0]
    m = float(np.abs(track).max())
    if m == 0.0:
        return np.zeros(2 * DYNAMIC_WINDOW)
    return (track / m).reshape(-1)


def fingertip_travel(history: list[KeypointFrame]) -> float:
    """Peak fingertip displacement from the window's first frame.

    Used by the live pipeline to decide whether a window is a moving
    (dynamic) gesture or a held pose.
    """
    track = np.array([f.points[INDEX_FINGERTIP] for f in history])
    return float(np.linalg.norm(track - track[0], axis=1).max())
