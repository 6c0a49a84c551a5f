"""One-vs-rest linear SVM trained with Pegasos-style stochastic subgradient steps.

Each document vector is scaled to unit L2 norm.  For class c the objective
is ``lam/2 * |w_c|^2 + mean_i hinge(y_ic * (w_c . x_i + b_c))``.  The
weights take the Pegasos step ``1/(lam*t)`` followed by projection onto
the ball of radius ``1/sqrt(lam)``, with ``t`` starting one epoch in so
the first steps are not enormous.  The bias is not regularized, so that
rate does not apply to it; it takes subgradient steps of size
``0.1/sqrt(t)``.  The returned model is the average of all iterates
weighted by ``t``, which is far less noisy than the last iterate.
Probabilities are a softmax over the per-class margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..corpus import LabelScheme
from .base import ModelError, ProbDist, as_matrix, check_training_data, softmax_rows, to_dists

_RESCALE_BELOW = 1e-100
BIAS_RATE = 0.1


def l2_normalize_rows(x: sp.csr_matrix) -> sp.csr_matrix:
    x = x.tocsr().astype(np.float64, copy=True)
    norms = np.sqrt(np.asarray(x.multiply(x).sum(axis=1)).ravel())
    norms[norms == 0] = 1.0
    return sp.diags(1.0 / norms) @ x


@dataclass(eq=False)
class SvmModel:
    scheme: LabelScheme
    weights: np.ndarray  # (C, V)
    bias: np.ndarray     # (C,)
    lam: float
    epochs: int
    seed: int
    class_weight: str | None = None

    kind = "svm"

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def margins(self, vectors) -> np.ndarray:
        x = l2_normalize_rows(as_matrix(vectors, self.n_features))
        return np.asarray(x @ self.weights.T) + self.bias[None, :]

    def predict_proba(self, vectors) -> np.ndarray:
        return softmax_rows(self.margins(vectors))

    def predict(self, vec) -> ProbDist:
        return to_dists(self.predict_proba(vec), self.scheme)[0]

    def objective(self, vectors, labels) -> np.ndarray:
        """Per-class training objective lam/2 |w|^2 + mean hinge."""
        x = as_matrix(vectors, self.n_features)
        y = check_training_data(x, labels, self.scheme)
        signs = -np.ones((len(y), len(self.scheme)))
        signs[np.arange(len(y)), y] = 1.0
        hinge = np.maximum(0.0, 1.0 - signs * self.margins(x)).mean(axis=0)
        return self.lam / 2 * (self.weights ** 2).sum(axis=1) + hinge

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "lam": self.lam,
            "epochs": self.epochs,
            "seed": self.seed,
            "class_weight": self.class_weight,
        }

    @classmethod
    def from_dict(cls, scheme: LabelScheme, d: dict) -> "SvmModel":
        return cls(
            scheme,
            np.asarray(d["weights"], dtype=np.float64).reshape(len(scheme), -1),
            np.asarray(d["bias"], dtype=np.float64),
            float(d["lam"]),
            int(d["epochs"]),
            int(d["seed"]),
            d.get("class_weight"),
        )


def train_svm(
    vectors,
    labels,
    scheme: LabelScheme,
    lam: float = 1e-4,
    epochs: int = 10,
    seed: int = 0,
    class_weight: str | None = None,
    n_features: int | None = None,
    on_epoch=None,
    bias_rate: float = BIAS_RATE,
) -> SvmModel:
    """Train the one-vs-rest SVM.

    ``class_weight="balanced"`` weights each document's loss by the inverse
    frequency of its class.  ``on_epoch(epoch, model)`` is called after
    every epoch with a snapshot of the current (averaged) model.
    """
    if lam <= 0:
        raise ModelError("lambda must be positive")
    if epochs < 1:
        raise ModelError("epochs must be a positive integer")
    if class_weight not in (None, "balanced"):
        raise ModelError(f"unknown class_weight {class_weight!r}")
    x = as_matrix(vectors, n_features)
    y = check_training_data(x, labels, scheme)
    present = np.unique(y)
    if len(present) < 2:
        raise ModelError("the SVM needs at least two classes in the training data")
    x = l2_normalize_rows(x)
    n, n_feat = x.shape
    n_classes = len(scheme)

    sample_weight = np.ones(n)
    if class_weight == "balanced":
        freq = np.bincount(y, minlength=n_classes)
        sample_weight = n / (len(present) * freq[y])

    signs = -np.ones((n, n_classes))
    signs[np.arange(n), y] = 1.0

    # current iterate w_c = scale[c] * v[c]; keeps the per-step shrink O(C)
    v = np.zeros((n_classes, n_feat))
    scale = np.ones(n_classes)
    v_sqnorm = np.zeros(n_classes)
    bias = np.zeros(n_classes)
    radius = 1.0 / math.sqrt(lam)
    # running sum of rho_t * w_t kept lazily as base + acc * v - z
    base = np.zeros((n_classes, n_feat))
    z = np.zeros((n_classes, n_feat))
    acc = np.zeros(n_classes)
    rho_sum = 0.0
    bias_sum = np.zeros(n_classes)

    indptr, indices, data = x.indptr, x.indices, x.data
    rng = np.random.default_rng(seed)
    t0 = n
    t = t0

    def snapshot():
        w = (base + acc[:, None] * v - z) / rho_sum
        return SvmModel(scheme, w, bias_sum / rho_sum, lam, epochs, seed, class_weight)

    for epoch in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            lo, hi = indptr[i], indptr[i + 1]
            idx, vals = indices[lo:hi], data[lo:hi]
            sub = v[:, idx]
            margin = scale * (sub @ vals) + bias
            s_i = signs[i]
            violated = s_i * margin < 1.0

            scale *= 1.0 - 1.0 / t
            if violated.any():
                step = eta * sample_weight[i]
                for c in np.flatnonzero(violated):
                    delta = (step * s_i[c] / scale[c]) * vals
                    v_sqnorm[c] += 2.0 * float(sub[c] @ delta) + float(delta @ delta)
                    v[c, idx] = sub[c] + delta
                    z[c, idx] += acc[c] * delta
                bias += (bias_rate * sample_weight[i] / math.sqrt(t)) * s_i * violated

            norms = scale * np.sqrt(np.maximum(v_sqnorm, 0.0))
            over = norms > radius
            if over.any():
                scale[over] *= radius / norms[over]

            rho = float(t)
            acc += rho * scale
            rho_sum += rho
            bias_sum += rho * bias

            small = scale < _RESCALE_BELOW
            if small.any():
                for c in np.flatnonzero(small):
                    base[c] += acc[c] * v[c] - z[c]
                    z[c] = 0.0
                    acc[c] = 0.0
                    v[c] *= scale[c]
                    v_sqnorm[c] = float(v[c] @ v[c])
                    scale[c] = 1.0
        if on_epoch is not None:
            on_epoch(epoch, snapshot())
    return snapshot()


def predict_svm(model: SvmModel, vec) -> ProbDist:
    return model.predict(vec)
