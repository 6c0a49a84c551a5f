"""Random forest of Gini-impurity decision trees on sparse count features.

Trees split on ``count <= threshold`` with thresholds at midpoints between
consecutive observed counts.  Each node looks at ceil(sqrt(V)) randomly
drawn features.  If none of them gives an impurity-reducing split, it keeps
drawing among the features that vary inside the node until one does.
Tree ``i`` is seeded with ``seed + i``, so serial and parallel training
build the same forest.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..corpus import LabelScheme
from .base import ModelError, ProbDist, as_matrix, check_training_data, to_dists

MIN_GAIN = 1e-12
_MAX_CELLS = 4_000_000  # bound on node-rows x features materialized at once


@dataclass(eq=False)
class Tree:
    feature: np.ndarray    # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray      # (nodes, C) weighted class counts

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def leaf_distributions(self) -> np.ndarray:
        return self.value / self.value.sum(axis=1, keepdims=True)

    def apply(self, x: sp.csr_matrix) -> np.ndarray:
        """Leaf index reached by every row of ``x``."""
        n = x.shape[0]
        node = np.zeros(n, dtype=np.int64)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            f = self.feature[node[active]]
            vals = np.asarray(x[active, f]).ravel()
            go_left = vals <= self.threshold[node[active]]
            node[active] = np.where(go_left, self.left[node[active]], self.right[node[active]])
            active = active[self.feature[node[active]] >= 0]
        return node

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict, n_classes: int) -> "Tree":
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=np.float64).reshape(-1, n_classes),
        )


@dataclass(eq=False)
class RfModel:
    scheme: LabelScheme
    trees: list
    n_trees: int
    max_depth: int | None
    features_per_split: int
    seed: int
    bootstrap: bool
    n_features: int

    kind = "rf"

    def predict_proba(self, vectors) -> np.ndarray:
        x = as_matrix(vectors, self.n_features)
        out = np.zeros((x.shape[0], len(self.scheme)))
        for tree in self.trees:
            out += tree.leaf_distributions()[tree.apply(x)]
        return out / len(self.trees)

    def predict(self, vec) -> ProbDist:
        return to_dists(self.predict_proba(vec), self.scheme)[0]

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "features_per_split": self.features_per_split,
            "seed": self.seed,
            "bootstrap": self.bootstrap,
            "n_features": self.n_features,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, scheme: LabelScheme, d: dict) -> "RfModel":
        trees = [Tree.from_dict(t, len(scheme)) for t in d["trees"]]
        return cls(
            scheme, trees, int(d["n_trees"]), d["max_depth"], int(d["features_per_split"]),
            int(d["seed"]), bool(d["bootstrap"]), int(d["n_features"]),
        )


def _gini(counts: np.ndarray) -> np.ndarray:
    total = counts.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = counts / total[..., None]
        g = 1.0 - (p * p).sum(axis=-1)
    return np.where(total > 0, g, 0.0)


def _best_split(x_node: sp.csr_matrix, feats: np.ndarray, y: np.ndarray, w: np.ndarray,
                n_classes: int, parent: np.ndarray):
    """Best (gain, feature, threshold, column) over ``feats``; gain <= MIN_GAIN means none.

    Ties on gain go to the lower feature index, then the lower threshold.
    """
    best = (MIN_GAIN, -1, 0.0, None)
    m = x_node.shape[0]
    step = max(1, _MAX_CELLS // max(m, 1))
    total = w.sum()
    parent_impurity = _gini(parent)
    for lo in range(0, len(feats), step):
        chunk = np.sort(feats[lo:lo + step])
        block = x_node[:, chunk].toarray().astype(np.int64)
        if block.size == 0:
            continue
        top = int(block.max())
        if top == 0:
            continue
        nv = top + 1
        k = len(chunk)
        key = ((np.arange(k)[None, :] * nv + block) * n_classes + y[:, None]).ravel()
        hist = np.bincount(key, weights=np.repeat(w, k), minlength=k * nv * n_classes)
        hist = hist.reshape(k, nv, n_classes)
        observed = hist.sum(axis=2) > 0                     # (k, nv)
        left = np.cumsum(hist, axis=1)                      # counts with value <= v
        right = parent[None, None, :] - left
        n_left = left.sum(axis=2)
        n_right = total - n_left
        valid = observed & (n_right > 0)
        if not valid.any():
            continue
        child = (n_left * _gini(left) + n_right * _gini(right)) / total
        gain = np.where(valid, parent_impurity - child, -np.inf)
        # feature order is ascending in the chunk, so argmax picks the lowest feature then threshold
        flat = int(np.argmax(gain))
        g = float(gain.flat[flat])
        if g > best[0]:
            j, v = divmod(flat, nv)
            nxt = v + 1 + int(np.argmax(observed[j, v + 1:]))
            best = (g, int(chunk[j]), (v + nxt) / 2.0, block[:, j])
        elif g == best[0] and best[1] >= 0 and g > MIN_GAIN:
            j, v = divmod(flat, nv)
            if int(chunk[j]) < best[1]:
                nxt = v + 1 + int(np.argmax(observed[j, v + 1:]))
                best = (g, int(chunk[j]), (v + nxt) / 2.0, block[:, j])
    return best


def build_tree(x: sp.csr_matrix, y: np.ndarray, n_classes: int, seed: int,
               max_depth: int | None, features_per_split: int, bootstrap: bool) -> Tree:
    rng = np.random.default_rng(seed)
    n, n_feat = x.shape
    if bootstrap:
        weights = np.bincount(rng.integers(0, n, n), minlength=n).astype(np.float64)
    else:
        weights = np.ones(n)
    rows0 = np.flatnonzero(weights > 0)

    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(counts):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(counts)
        return len(feature) - 1

    root_counts = np.bincount(y[rows0], weights=weights[rows0], minlength=n_classes)
    stack = [(new_node(root_counts), rows0, 0)]
    while stack:
        node, rows, depth = stack.pop()
        counts = value[node]
        if np.count_nonzero(counts) <= 1 or (max_depth is not None and depth >= max_depth):
            continue
        x_node = x[rows]
        w_node = weights[rows]
        y_node = y[rows]
        k = min(features_per_split, n_feat)
        first = rng.choice(n_feat, size=k, replace=False)
        best = _best_split(x_node, first, y_node, w_node, n_classes, counts)
        if best[1] < 0:
            varying = np.unique(x_node.indices)
            rest = np.setdiff1d(varying, first, assume_unique=False)
            rest = rng.permutation(rest)
            for lo in range(0, len(rest), k):
                best = _best_split(x_node, rest[lo:lo + k], y_node, w_node, n_classes, counts)
                if best[1] >= 0:
                    break
        if best[1] < 0:
            continue
        _, f, thr, column = best
        go_left = column <= thr
        l_rows, r_rows = rows[go_left], rows[~go_left]
        l_counts = np.bincount(y[l_rows], weights=weights[l_rows], minlength=n_classes)
        r_counts = np.bincount(y[r_rows], weights=weights[r_rows], minlength=n_classes)
        feature[node], threshold[node] = f, thr
        left[node] = new_node(l_counts)
        right[node] = new_node(r_counts)
        # right pushed first so the left subtree is numbered first
        stack.append((right[node], r_rows, depth + 1))
        stack.append((left[node], l_rows, depth + 1))
    return Tree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(value, dtype=np.float64).reshape(-1, n_classes),
    )


_shared: dict = {}


def _init_worker(x, y, params):
    _shared["x"], _shared["y"], _shared["params"] = x, y, params


def _build_shared(seed):
    return build_tree(_shared["x"], _shared["y"], seed=seed, **_shared["params"])


def train_rf(
    vectors,
    labels,
    scheme: LabelScheme,
    n_trees: int = 100,
    max_depth: int | None = None,
    seed: int = 0,
    features_per_split: int | None = None,
    bootstrap: bool = True,
    n_jobs: int = 1,
    n_features: int | None = None,
) -> RfModel:
    if n_trees < 1:
        raise ModelError("n_trees must be at least 1")
    if max_depth is not None and max_depth < 0:
        raise ModelError("max_depth must be non-negative")
    x = as_matrix(vectors, n_features)
    y = check_training_data(x, labels, scheme)
    n_feat = x.shape[1]
    if features_per_split is None:
        features_per_split = max(1, math.ceil(math.sqrt(n_feat)))
    params = dict(
        n_classes=len(scheme), max_depth=max_depth,
        features_per_split=features_per_split, bootstrap=bootstrap,
    )
    seeds = [seed + i for i in range(n_trees)]
    if n_jobs is None or n_jobs <= 0:
        n_jobs = os.cpu_count() or 1
    if n_jobs > 1 and n_trees > 1:
        with ProcessPoolExecutor(max_workers=min(n_jobs, n_trees), initializer=_init_worker,
                                 initargs=(x, y, params)) as pool:
            trees = list(pool.map(_build_shared, seeds))
    else:
        trees = [build_tree(x, y, seed=s, **params) for s in seeds]
    return RfModel(scheme, trees, n_trees, max_depth, features_per_split, seed, bootstrap, n_feat)


def predict_rf(model: RfModel, vec) -> ProbDist:
    return model.predict(vec)
