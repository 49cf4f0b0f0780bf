"""Dataset and recording file formats.

Feature datasets are CSV with a label column followed by feature columns.
Raw keypoint recordings are JSON-lines, one KeypointFrame per line.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .features import KeypointFrame
from .mlp import Dataset


def save_dataset_csv(dataset: Dataset, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["label"] + [f"f{i}" for i in range(dataset.features.shape[1])])
        for label, row in zip(dataset.labels, dataset.features):
            writer.writerow([label] + [repr(float(v)) for v in row])


def load_dataset_csv(path) -> Dataset:
    labels: list[str] = []
    rows: list[list[float]] = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[0] != "label":
            raise ValueError(f"{path}: expected a 'label' first column")
        width = len(header) - 1
        for lineno, row in enumerate(reader, start=2):
            if len(row) != width + 1:
                raise ValueError(f"{path}:{lineno}: expected {width + 1} columns, got {len(row)}")
            labels.append(row[0])
            rows.append([float(v) for v in row[1:]])
    if not rows:
        raise ValueError(f"{path}: dataset is empty")
    return Dataset(features=np.array(rows), labels=labels)


def write_recording(frames: list[KeypointFrame], path) -> None:
    with open(path, "w") as f:
        for frame in frames:
            f.write(json.dumps(frame.to_dict()) + "\n")


def read_recording(path) -> list[KeypointFrame]:
    frames: list[KeypointFrame] = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                frames.append(KeypointFrame.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad keypoint record: {exc}") from exc
    return frames
