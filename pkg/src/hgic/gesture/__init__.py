from .features import (
    DYNAMIC_WINDOW,
    GestureKind,
    GestureObservation,
    KeypointFrame,
    fingertip_travel,
    normalize_dynamic,
    normalize_static,
)
from .mlp import (
    ClassifierModel,
    Dataset,
    EvalMetrics,
    TrainConfig,
    evaluate,
    forward,
    train,
)
from .synth import (
    ALL_DYNAMIC_CLASSES,
    DYNAMIC_CLASSES,
    STATIC_CLASSES,
    make_dynamic_dataset,
    make_static_dataset,
    sample_dynamic,
    sample_static,
)

__all__ = [
    "DYNAMIC_WINDOW",
    "GestureKind",
    "GestureObservation",
    "KeypointFrame",
    "fingertip_travel",
    "normalize_dynamic",
    "normalize_static",
    "ClassifierModel",
    "Dataset",
    "EvalMetrics",
    "TrainConfig",
    "evaluate",
    "forward",
    "train",
    "ALL_DYNAMIC_CLASSES",
    "DYNAMIC_CLASSES",
    "STATIC_CLASSES",
    "make_dynamic_dataset",
    "make_static_dataset",
    "sample_dynamic",
    "sample_static",
]
