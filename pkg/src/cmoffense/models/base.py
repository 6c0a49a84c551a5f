from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..corpus import Label, LabelScheme
from ..features import CountVector, to_csr

PROB_TOL = 1e-9


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ProbDist:
    scheme: LabelScheme
    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != len(self.scheme):
            raise ModelError(f"{len(values)} probabilities for a {len(self.scheme)}-label scheme")
        if any(not (0.0 <= v <= 1.0) for v in values):
            raise ModelError(f"probabilities outside [0, 1]: {values}")
        if abs(sum(values) - 1.0) > PROB_TOL:
            raise ModelError(f"probabilities sum to {sum(values)!r}, not 1")

    def __getitem__(self, label: Label) -> float:
        return self.values[self.scheme.index(label)]

    def argmax(self) -> Label:
        """Most probable label; ties go to the earlier label in the scheme."""
        best = 0
        for i, v in enumerate(self.values):
            if v > self.values[best]:
                best = i
        return self.scheme.labels[best]

    def as_dict(self) -> dict[Label, float]:
        return dict(zip(self.scheme.labels, self.values))


def as_matrix(vectors, n_features: int | None = None) -> sp.csr_matrix:
    """Accept a CSR matrix, a single CountVector or a list of them."""
    if isinstance(vectors, CountVector):
        vectors = [vectors]
    if sp.issparse(vectors):
        x = vectors.tocsr()
    else:
        vectors = list(vectors)
        x = to_csr(vectors, n_features if not vectors else None)
    if n_features is not None and x.shape[1] != n_features:
        raise ModelError(f"expected {n_features} features, got {x.shape[1]}")
    return x.astype(np.float64)


def check_training_data(x: sp.csr_matrix, labels: Sequence[Label], scheme: LabelScheme) -> np.ndarray:
    if x.shape[0] == 0:
        raise ModelError("no training documents")
    if x.shape[0] != len(labels):
        raise ModelError(f"{x.shape[0]} documents but {len(labels)} labels")
    y = []
    for i, label in enumerate(labels):
        if label is None:
            raise ModelError(f"document {i} is unlabelled")
        if label not in scheme:
            raise ModelError(f"document {i}: label {label} not in scheme {scheme.name!r}")
        y.append(scheme.index(label))
    return np.asarray(y, dtype=np.int64)


def to_dists(probs: np.ndarray, scheme: LabelScheme) -> list[ProbDist]:
    return [ProbDist(scheme, tuple(row)) for row in probs]


def softmax_rows(scores: np.ndarray) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    m = np.max(scores, axis=1, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    e = np.exp(scores - m)
    return e / e.sum(axis=1, keepdims=True)
