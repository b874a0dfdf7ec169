"""Actor-versus-pattern matrix construction and attribution models."""

from .matrix import CtaTtpMatrix, build_matrix
from .classifiers import (
    MODEL_KINDS,
    TrainedModel,
    train,
    predict,
)
from .evaluation import EvalReport, confusion_matrix, cross_validate, metrics
from .persist import load_model, save_model

__all__ = [
    "CtaTtpMatrix", "build_matrix",
    "MODEL_KINDS", "TrainedModel", "train", "predict",
    "EvalReport", "confusion_matrix", "cross_validate", "metrics",
    "load_model", "save_model",
]
