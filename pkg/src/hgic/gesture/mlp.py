"""Small fully-connected classifier trained from scratch with numpy.

Architecture: affine layers with ReLU activations and a softmax output,
trained by mini-batch gradient descent on cross-entropy. Training is
deterministic for a fixed seed (seeded init, seeded shuffle order).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Dataset:
    features: np.ndarray  # (n, d)
    labels: list[str]

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim != 2 or len(self.labels) != self.features.shape[0]:
            raise ValueError("features must be (n, d) with one label per row")

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass
class TrainConfig:
    hidden: tuple[int, ...] = (64, 32)
    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 60
    seed: int = 0
    val_fraction: float = 0.2


@dataclass
class ClassifierModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    labels: list[str]
    training: dict = field(default_factory=dict)

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def save(self, path) -> None:
        doc = {
            "format_version": 1,
            "layer_sizes": self.layer_sizes,
            "labels": self.labels,
            "weights": [w.reshape(-1).tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "training": self.training,
        }
        with open(path, "w") as f:
            json.dump(doc, f)

    @classmethod
    def load(cls, path) -> "ClassifierModel":
        with open(path) as f:
            doc = json.load(f)
        if doc.get("format_version") != 1:
            raise ValueError(f"unsupported model format_version {doc.get('format_version')}")
        sizes = doc["layer_sizes"]
        weights = [
            np.asarray(doc["weights"][i], dtype=float).reshape(sizes[i], sizes[i + 1])
            for i in range(len(sizes) - 1)
        ]
        biases = [np.asarray(b, dtype=float) for b in doc["biases"]]
        return cls(weights=weights, biases=biases, labels=list(doc["labels"]),
                   training=doc.get("training", {}))


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward(model: ClassifierModel, features: np.ndarray) -> np.ndarray:
    """Class probabilities for one feature vector or a batch.

    Raises:
        ValueError: feature width does not match the input layer.
    """
    x = np.asarray(features, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != model.weights[0].shape[0]:
        raise ValueError(
            f"feature length {x.shape[1]} does not match input size {model.weights[0].shape[0]}"
        )
    h = x
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
    probs = _softmax(h @ model.weights[-1] + model.biases[-1])
    return probs[0] if single else probs


def loss_and_grads(
    model: ClassifierModel, x: np.ndarray, y: np.ndarray
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean cross-entropy over the batch and its parameter gradients."""
    acts = [np.asarray(x, dtype=float)]
    h = acts[0]
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
        acts.append(h)
    logits = acts[-1] @ model.weights[-1] + model.biases[-1]
    probs = _softmax(logits)
    n = x.shape[0]
    loss = float(-np.log(np.clip(probs[np.arange(n), y], 1e-300, None)).mean())

    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads_w: list[np.ndarray] = [None] * len(model.weights)  # type: ignore[list-item]
    grads_b: list[np.ndarray] = [None] * len(model.biases)  # type: ignore[list-item]
    for layer in range(len(model.weights) - 1, -1, -1):
        grads_w[layer] = acts[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ model.weights[layer].T) * (acts[layer] > 0.0)
    return loss, grads_w, grads_b


def init_model(input_size: int, hidden: tuple[int, ...], labels: list[str], seed: int) -> ClassifierModel:
    rng = np.random.default_rng(seed)
    sizes = [input_size, *hidden, len(labels)]
    weights = [
        rng.normal(0.0, np.sqrt(2.0 / sizes[i]), size=(sizes[i], sizes[i + 1]))
        for i in range(len(sizes) - 1)
    ]
    biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
    return ClassifierModel(weights=weights, biases=biases, labels=list(labels))


def train(dataset: Dataset, config: TrainConfig | None = None) -> ClassifierModel:
    """Fit a classifier on the dataset; deterministic for a fixed seed.

    Raises:
        ValueError: fewer than two classes in the dataset.
    """
    config = config or TrainConfig()
    labels = sorted(set(dataset.labels))
    if len(labels) < 2:
        raise ValueError("training needs at least two classes")
    index = {lab: i for i, lab in enumerate(labels)}
    y = np.array([index[lab] for lab in dataset.labels])
    x = dataset.features

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(dataset))
    n_val = int(round(config.val_fraction * len(dataset)))
    val_idx, train_idx = order[:n_val], order[n_val:]
    xt, yt = x[train_idx], y[train_idx]
    xv, yv = x[val_idx], y[val_idx]

    model = init_model(x.shape[1], config.hidden, labels, config.seed)
    lr = config.learning_rate
    for _epoch in range(config.epochs):
        perm = rng.permutation(len(xt))
        for start in range(0, len(xt), config.batch_size):
            batch = perm[start : start + config.batch_size]
            _, gw, gb = loss_and_grads(model, xt[batch], yt[batch])
            for layer in range(len(model.weights)):
                model.weights[layer] -= lr * gw[layer]
                model.biases[layer] -= lr * gb[layer]

    train_acc = _accuracy(model, xt, yt)
    val_acc = _accuracy(model, xv, yv) if len(xv) else train_acc
    model.training = {
        "epochs": config.epochs,
        "learning_rate": lr,
        "batch_size": config.batch_size,
        "seed": config.seed,
        "train_accuracy": train_acc,
        "validation_accuracy": val_acc,
        "n_train": int(len(xt)),
        "n_val": int(len(xv)),
    }
    return model


def _accuracy(model: ClassifierModel, x: np.ndarray, y: np.ndarray) -> float:
    if len(x) == 0:
        return 0.0
    pred = forward(model, x).argmax(axis=1)
    return float((pred == y).mean())


@dataclass
class EvalMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: np.ndarray

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "f1_score": self.f1,
            "precision": self.precision,
            "recall": self.recall,
        }


def evaluate(model: ClassifierModel, dataset: Dataset) -> EvalMetrics:
    """Accuracy plus macro precision / recall / F1 over the dataset.

    Raises:
        ValueError: empty dataset or labels outside the model's table.
    """
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    index = {lab: i for i, lab in enumerate(model.labels)}
    try:
        y = np.array([index[lab] for lab in dataset.labels])
    except KeyError as exc:
        raise ValueError(f"dataset label {exc} not in the model's label table") from exc
    pred = forward(model, dataset.features)
    pred = pred.argmax(axis=1) if pred.ndim == 2 else np.array([pred.argmax()])
    return metrics_from_predictions(y, pred, len(model.labels))


def metrics_from_predictions(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> EvalMetrics:
    confusion = np.zeros((n_classes, n_classes), dtype=int)
    for t, p in zip(y_true, y_pred):
        confusion[t, p] += 1
    accuracy = float(np.trace(confusion) / confusion.sum())
    precisions = []
    recalls = []
    f1s = []
    for c in range(n_classes):
        tp = confusion[c, c]
        fp = confusion[:, c].sum() - tp
        fn = confusion[c, :].sum() - tp
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        precisions.append(prec)
        recalls.append(rec)
        f1s.append(f1)
    return EvalMetrics(
        accuracy=accuracy,
        precision=float(np.mean(precisions)),
        recall=float(np.mean(recalls)),
        f1=float(np.mean(f1s)),
        confusion=confusion,
    )
