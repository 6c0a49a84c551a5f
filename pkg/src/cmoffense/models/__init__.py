from .base import ModelError, ProbDist
from .forest import RfModel, predict_rf, train_rf
from .io import load_model, save_model
from .mnb import MnbModel, predict_mnb, train_mnb
from .svm import SvmModel, predict_svm, train_svm

KINDS = ("mnb", "svm", "rf")


def train(kind: str, vectors, labels, scheme, **params):
    """Dispatch to the trainer for ``kind``."""
    if kind == "mnb":
        return train_mnb(vectors, labels, scheme, **params)
    if kind == "svm":
        return train_svm(vectors, labels, scheme, **params)
    if kind == "rf":
        return train_rf(vectors, labels, scheme, **params)
    raise ModelError(f"unknown model kind {kind!r} (choose from {', '.join(KINDS)})")


__all__ = [
    "KINDS", "ModelError", "ProbDist", "MnbModel", "SvmModel", "RfModel",
    "train", "train_mnb", "train_svm", "train_rf", "predict_mnb", "predict_svm", "predict_rf",
    "save_model", "load_model",
]
