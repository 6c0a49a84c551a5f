"""Multinomial naive Bayes over word counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus import LabelScheme
from .base import ModelError, ProbDist, as_matrix, check_training_data, softmax_rows, to_dists


@dataclass(eq=False)
class MnbModel:
    scheme: LabelScheme
    alpha: float
    log_prior: np.ndarray       # (C,)
    log_likelihood: np.ndarray  # (C, V)

    kind = "mnb"

    @property
    def n_features(self) -> int:
        return self.log_likelihood.shape[1]

    def predict_proba(self, vectors) -> np.ndarray:
        x = as_matrix(vectors, self.n_features)
        # 0 * -inf never happens: the likelihood table is finite
        joint = np.asarray(x @ self.log_likelihood.T) + self.log_prior[None, :]
        return softmax_rows(joint)

    def predict(self, vec) -> ProbDist:
        return to_dists(self.predict_proba(vec), self.scheme)[0]

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "log_prior": self.log_prior.tolist(),
            "log_likelihood": self.log_likelihood.tolist(),
        }

    @classmethod
    def from_dict(cls, scheme: LabelScheme, d: dict) -> "MnbModel":
        return cls(
            scheme,
            float(d["alpha"]),
            np.asarray(d["log_prior"], dtype=np.float64),
            np.asarray(d["log_likelihood"], dtype=np.float64).reshape(len(scheme), -1),
        )


def train_mnb(vectors, labels, scheme: LabelScheme, alpha: float = 1.0, n_features: int | None = None) -> MnbModel:
    """Class-count priors and Laplace-smoothed per-class token distributions."""
    if alpha < 0:
        raise ModelError("alpha must be non-negative")
    x = as_matrix(vectors, n_features)
    y = check_training_data(x, labels, scheme)
    n_classes, n_feat = len(scheme), x.shape[1]
    class_docs = np.bincount(y, minlength=n_classes).astype(np.float64)
    onehot = np.zeros((len(y), n_classes))
    onehot[np.arange(len(y)), y] = 1.0
    counts = np.asarray((x.T @ onehot).T)  # (C, V)
    if alpha == 0 and (counts <= 0).any():
        c, f = np.argwhere(counts <= 0)[0]
        raise ModelError(
            f"alpha=0 with zero count for class {scheme.labels[c]} and feature {f} (log-likelihood would be -inf)"
        )
    smoothed = counts + alpha
    totals = smoothed.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore"):
        log_prior = np.log(class_docs / class_docs.sum())
        log_lik = np.log(smoothed) - np.log(totals) if n_feat else np.zeros((n_classes, 0))
    if not np.isfinite(log_lik).all():
        # only reachable with alpha=0 for a class with no documents
        raise ModelError("alpha=0 leaves a class without any token mass")
    return MnbModel(scheme, float(alpha), log_prior, log_lik)


def predict_mnb(model: MnbModel, vec) -> ProbDist:
    return model.predict(vec)
