"""Deterministic synthetic gesture data.

Static poses are built from a parametric 21-point hand skeleton (per-finger
extended/curled states, thumb pose, whole-hand rotation); dynamic gestures
translate a pointing hand along a parametric trajectory. Samples add the
augmentations a camera would introduce: small rotation jitter, uniform
scale, translation, and Gaussian keypoint noise (sigma = 0.01 image units).
"""

from __future__ import annotations

import math

import numpy as np

from .features import (
    DYNAMIC_WINDOW,
    KeypointFrame,
    normalize_dynamic,
    normalize_static,
)
from .mlp import Dataset

NOISE_SIGMA = 0.01
ROT_JITTER = math.radians(5.0)

# finger -> (MCP base offset from wrist, length); x right, y down, hand
# upright means fingers point toward -y.
_FINGERS = {
    "index": ((-0.045, -0.105), 0.115),
    "middle": ((-0.015, -0.11), 0.13),
    "ring": ((0.015, -0.105), 0.12),
    "pinky": ((0.045, -0.095), 0.095),
}

# Static classes: (finger extension pattern, thumb pose, rotation degrees).
_STATIC_POSES: dict[str, tuple[dict[str, bool], str, float]] = {
    "fist": ({}, "fold", 0.0),
    "open_palm": ({"index": True, "middle": True, "ring": True, "pinky": True}, "out", 0.0),
    "point_up": ({"index": True}, "fold", 0.0),
    "point_left": ({"index": True}, "fold", 90.0),
    "point_right": ({"index": True}, "fold", -90.0),
    "point_down": ({"index": True}, "fold", 180.0),
    "victory": ({"index": True, "middle": True}, "fold", 0.0),
    "three": ({"index": True, "middle": True, "ring": True}, "fold", 0.0),
    "four": ({"index": True, "middle": True, "ring": True, "pinky": True}, "fold", 0.0),
    "thumbs_up": ({}, "up", 0.0),
    "thumbs_down": ({}, "up", 180.0),
    "ok_sign": ({"middle": True, "ring": True, "pinky": True}, "pinch", 0.0),
    "pinky_up": ({"pinky": True}, "fold", 0.0),
    "shaka": ({"pinky": True}, "out", 0.0),
    "gun": ({"index": True}, "up", 0.0),
    "rock_sign": ({"index": True, "pinky": True}, "fold", 0.0),
}

STATIC_CLASSES = list(_STATIC_POSES)

# Default label table: 16 static classes plus the two horizontal swipes.
DYNAMIC_CLASSES = ["swipe_left", "swipe_right"]
ALL_DYNAMIC_CLASSES = [
    "swipe_left",
    "swipe_right",
    "swipe_up",
    "swipe_down",
    "circle_cw",
    "circle_ccw",
]


def _finger_points(base: np.ndarray, length: float, extended: bool) -> list[np.ndarray]:
    """MCP/PIP/DIP/TIP chain for one finger, upright frame."""
    up = np.array([0.0, -1.0])
    down = np.array([0.0, 1.0])
    if extended:
        return [base, base + 0.4 * length * up, base + 0.7 * length * up, base + length * up]
    pip = base + 0.28 * length * up
    dip = pip + 0.16 * length * down + np.array([0.02, 0.0])
    tip = dip + 0.2 * length * down
    return [base, pip, dip, tip]


def _thumb_points(wrist: np.ndarray, pose: str) -> list[np.ndarray]:
    """CMC/MCP/IP/TIP chain; the thumb sits on the -x side of the palm."""
    cmc = wrist + np.array([-0.055, -0.03])
    if pose == "out":
        step = np.array([-0.035, -0.012])
    elif pose == "up":
        step = np.array([-0.012, -0.04])
    elif pose == "pinch":
        step = np.array([0.012, -0.035])
    else:  # fold across the palm
        step = np.array([0.028, -0.012])
    return [cmc, cmc + step, cmc + 2 * step, cmc + 3 * step]


def static_template(name: str) -> np.ndarray:
    """Canonical 21-point skeleton for a static class, centered in frame."""
    try:
        pattern, thumb, rot_deg = _STATIC_POSES[name]
    except KeyError:
        raise ValueError(f"unknown static gesture class {name!r}") from None
    wrist = np.array([0.5, 0.72])
    pts = [wrist]
    pts.extend(_thumb_points(wrist, thumb))
    for finger, (offset, length) in _FINGERS.items():
        base = wrist + np.array(offset) + np.array([0.0, -0.03])
        pts.extend(_finger_points(base, length, pattern.get(finger, False)))
    arr = np.array(pts)
    if thumb == "pinch":
        arr[4] = arr[8]  # thumb tip touches the index tip
    if rot_deg:
        arr = _rotate(arr, math.radians(rot_deg), wrist)
    return arr


def _rotate(pts: np.ndarray, angle: float, about: np.ndarray) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    rel = pts - about
    return np.column_stack([c * rel[:, 0] - s * rel[:, 1], s * rel[:, 0] + c * rel[:, 1]]) + about


def sample_static(name: str, rng: np.random.Generator, frame_index: int = 0) -> KeypointFrame:
    """One augmented static sample: jittered rotation/scale/translation + noise."""
    pts = static_template(name)
    wrist = pts[0].copy()
    pts = _rotate(pts, rng.uniform(-ROT_JITTER, ROT_JITTER), wrist)
    scale = rng.uniform(0.7, 1.3)
    pts = wrist + (pts - wrist) * scale
    pts = pts + rng.uniform(-0.15, 0.15, size=2)
    pts = pts + rng.normal(0.0, NOISE_SIGMA, size=pts.shape)
    return KeypointFrame(frame_index=frame_index, points=np.clip(pts, 0.0, 1.0),
                         detection_confidence=float(rng.uniform(0.92, 1.0)))


def _trajectory(name: str, t: np.ndarray) -> np.ndarray:
    """Hand-center path for a dynamic class, t in [0, 1]."""
    if name == "swipe_left":
        return np.column_stack([0.72 - 0.45 * t, np.full_like(t, 0.5)])
    if name == "swipe_right":
        return np.column_stack([0.28 + 0.45 * t, np.full_like(t, 0.5)])
    if name == "swipe_up":
        return np.column_stack([np.full_like(t, 0.5), 0.75 - 0.45 * t])
    if name == "swipe_down":
        return np.column_stack([np.full_like(t, 0.5), 0.3 + 0.45 * t])
    if name == "circle_cw":
        a = 2 * math.pi * t
        return np.column_stack([0.5 + 0.18 * np.cos(a), 0.5 + 0.18 * np.sin(a)])
    if name == "circle_ccw":
        a = -2 * math.pi * t
        return np.column_stack([0.5 + 0.18 * np.cos(a), 0.5 + 0.18 * np.sin(a)])
    raise ValueError(f"unknown dynamic gesture class {name!r}")


def sample_dynamic(
    name: str, rng: np.random.Generator, start_frame: int = 0, window: int = DYNAMIC_WINDOW
) -> list[KeypointFrame]:
    """One augmented dynamic sample: a pointing hand swept along the path."""
    base = static_template("point_up")
    base = base - base[0] + np.array([0.0, 0.12])  # wrist trails the path center
    t = np.linspace(0.0, 1.0, window)
    path = _trajectory(name, t)
    speed_jitter = rng.uniform(0.85, 1.15)
    path = path[0] + (path - path[0]) * speed_jitter
    hand_scale = rng.uniform(0.85, 1.15)
    frames = []
    for k in range(window):
        pts = base * hand_scale + path[k]
        pts = pts + rng.normal(0.0, NOISE_SIGMA, size=pts.shape)
        frames.append(
            KeypointFrame(frame_index=start_frame + k, points=np.clip(pts, 0.0, 1.0),
                          detection_confidence=float(rng.uniform(0.92, 1.0)))
        )
    return frames


def make_static_dataset(
    classes: list[str] | None = None, n_per_class: int = 2000, seed: int = 0
) -> Dataset:
    classes = classes or STATIC_CLASSES
    rng = np.random.default_rng(seed)
    feats = []
    labels = []
    for name in classes:
        for _ in range(n_per_class):
            feats.append(normalize_static(sample_static(name, rng)))
            labels.append(name)
    return Dataset(features=np.array(feats), labels=labels)


def make_dynamic_dataset(
    classes: list[str] | None = None, n_per_class: int = 2000, seed: int = 0
) -> Dataset:
    classes = classes or DYNAMIC_CLASSES
    rng = np.random.default_rng(seed)
    feats = []
    labels = []
    for name in classes:
        for _ in range(n_per_class):
            feats.append(normalize_dynamic(sample_dynamic(name, rng)))
            labels.append(name)
    return Dataset(features=np.array(feats), labels=labels)
