"""Probability-averaging ensembles and the prediction interchange file.

A prediction file is UTF-8 TSV with a header ``id<TAB><label>...`` naming
labels by their canonical strings, then one row of probabilities per post.
Column order follows the header, not the scheme, so files written by other
tools only need the right label names.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import ALL_LABELS, Label, LabelError, LabelScheme, scheme_for_labels
from .models.base import ProbDist

NORM_TOL = 1e-6
DRIFT_TOL = 1e-12


class EnsembleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PredictionSet:
    model_id: str
    scheme: LabelScheme
    ids: tuple[str, ...]
    probs: np.ndarray  # (rows, labels) in scheme order

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64).reshape(len(self.ids), len(self.scheme))
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "ids", tuple(self.ids))
        if len(set(self.ids)) != len(self.ids):
            seen = set()
            dup = next(i for i in self.ids if i in seen or seen.add(i))
            raise EnsembleError(f"duplicate post id {dup!r} in prediction set {self.model_id!r}")
        for row_id, row in zip(self.ids, probs):
            if not (np.all(row >= 0.0) and np.all(row <= 1.0)) or abs(row.sum() - 1.0) > 1e-9:
                raise EnsembleError(f"row {row_id!r} is not a probability distribution")

    @classmethod
    def from_rows(cls, model_id: str, scheme: LabelScheme, rows: Sequence[tuple[str, ProbDist]]):
        ids = [r[0] for r in rows]
        probs = np.array([r[1].values for r in rows], dtype=np.float64).reshape(len(rows), len(scheme))
        return cls(model_id, scheme, tuple(ids), probs)

    @property
    def rows(self) -> list[tuple[str, ProbDist]]:
        return [(i, ProbDist(self.scheme, tuple(p))) for i, p in zip(self.ids, self.probs)]

    def __len__(self):
        return len(self.ids)

    def row(self, post_id: str) -> ProbDist:
        return ProbDist(self.scheme, tuple(self.probs[self.ids.index(post_id)]))


@dataclass(frozen=True)
class EnsembleConfig:
    members: tuple[str, ...] = ()
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            object.__setattr__(self, "weights", w)
            if len(w) != len(self.members):
                raise EnsembleError(f"{len(w)} weights for {len(self.members)} members")
            if any(not math.isfinite(x) or x < 0 for x in w) or sum(w) <= 0:
                raise EnsembleError("weights must be non-negative with a positive sum")


def _select(sets: Sequence[PredictionSet], config: EnsembleConfig | None):
    if config is None or not config.members:
        weights = config.weights if config is not None and config.weights is not None else None
        if weights is not None and len(weights) != len(sets):
            raise EnsembleError(f"{len(weights)} weights for {len(sets)} prediction sets")
        return list(sets), list(weights or [1.0] * len(sets))
    by_id = {}
    for s in sets:
        by_id.setdefault(s.model_id, s)
    chosen = []
    for m in config.members:
        if m not in by_id:
            raise EnsembleError(f"ensemble member {m!r} not among the prediction sets")
        chosen.append(by_id[m])
    return chosen, list(config.weights or [1.0] * len(chosen))


def average(sets: Sequence[PredictionSet], config: EnsembleConfig | None = None) -> PredictionSet:
    """Weighted mean of member probabilities, aligned by post id.

    Output rows follow the order of the first member.
    """
    if not sets:
        raise EnsembleError("nothing to average")
    members, weights = _select(sets, config)
    first = members[0]
    for s in members[1:]:
        if s.scheme.labels != first.scheme.labels:
            raise EnsembleError(
                f"scheme mismatch: {first.model_id!r} uses {first.scheme.name!r}, {s.model_id!r} uses {s.scheme.name!r}"
            )
    index = {i: r for r, i in enumerate(first.ids)}
    total_w = float(sum(weights))
    out = np.zeros_like(first.probs)
    for s, w in zip(members, weights):
        own = {i: r for r, i in enumerate(s.ids)}
        missing = next((i for i in first.ids if i not in own), None)
        if missing is not None:
            raise EnsembleError(f"post id {missing!r} missing from {s.model_id!r}")
        extra = next((i for i in s.ids if i not in index), None)
        if extra is not None:
            raise EnsembleError(f"post id {extra!r} in {s.model_id!r} but not in {first.model_id!r}")
        if w == 0.0:
            continue
        order = np.fromiter((own[i] for i in first.ids), dtype=np.int64, count=len(first.ids))
        out += (w / total_w) * s.probs[order]
    sums = out.sum(axis=1, keepdims=True)
    drift = np.abs(sums - 1.0) > DRIFT_TOL
    if drift.any():
        out = np.where(drift, out / sums, out)
    return PredictionSet("+".join(s.model_id for s in members), first.scheme, first.ids, out)


def decode(pset: PredictionSet) -> list[tuple[str, Label]]:
    """Argmax label per row; ties go to the earlier label in the scheme."""
    labels = pset.scheme.labels
    # np.argmax returns the first maximal index, which is the scheme-order tie rule
    return [(i, labels[int(np.argmax(row))]) for i, row in zip(pset.ids, pset.probs)]


def widen(pset: PredictionSet, scheme: LabelScheme) -> PredictionSet:
    """Re-express predictions in a scheme that contains every current label, with zeros elsewhere."""
    missing = [l for l in pset.scheme.labels if l not in scheme]
    if missing:
        raise EnsembleError(f"scheme {scheme.name!r} lacks labels {[str(l) for l in missing]}")
    out = np.zeros((len(pset), len(scheme)))
    for j, label in enumerate(pset.scheme.labels):
        out[:, scheme.index(label)] = pset.probs[:, j]
    return PredictionSet(pset.model_id, scheme, pset.ids, out)


def save_predictions(pset: PredictionSet, path) -> None:
    lines = ["\t".join(["id"] + [l.render() for l in pset.scheme.labels])]
    for post_id, row in zip(pset.ids, pset.probs):
        if "\t" in post_id or "\n" in post_id:
            raise EnsembleError(f"post id {post_id!r} contains a tab or newline")
        lines.append("\t".join([post_id] + [repr(float(p)) for p in row]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")


def load_predictions(path, scheme: LabelScheme | None = None, model_id: str | None = None) -> PredictionSet:
    """Read a prediction file; ``scheme`` defaults to the one matching the header labels."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise EnsembleError(f"{path}: {e.strerror or e}") from None
    except UnicodeDecodeError:
        raise EnsembleError(f"{path}: not UTF-8") from None
    if not text.endswith("\n"):
        raise EnsembleError(f"{path}: missing trailing newline")
    lines = text[:-1].split("\n")
    header = lines[0].rstrip("\r").split("\t")
    if header[0] != "id" or len(header) < 2:
        raise EnsembleError(f"{path}:1: header must be id<TAB><label>...")
    try:
        cols = [Label.parse(h) for h in header[1:]]
    except LabelError as e:
        raise EnsembleError(f"{path}:1: {e}") from None
    if len(set(cols)) != len(cols):
        raise EnsembleError(f"{path}:1: repeated label column")
    if scheme is None:
        try:
            scheme = scheme_for_labels(sorted(cols, key=ALL_LABELS.index))
        except ValueError as e:
            raise EnsembleError(f"{path}:1: {e}") from None
    elif set(cols) != set(scheme.labels):
        raise EnsembleError(
            f"{path}:1: header labels {[str(c) for c in cols]} do not match scheme {scheme.name!r}"
        )
    order = [scheme.index(c) for c in cols]
    ids, rows = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.rstrip("\r").split("\t")
        if len(cells) != len(header):
            raise EnsembleError(f"{path}:{lineno}: expected {len(header)} columns, got {len(cells)}")
        try:
            vals = [float(c) for c in cells[1:]]
        except ValueError:
            raise EnsembleError(f"{path}:{lineno}: non-numeric probability") from None
        if any(not math.isfinite(v) or v < 0.0 or v > 1.0 for v in vals):
            raise EnsembleError(f"{path}:{lineno}: probabilities must lie in [0, 1]")
        total = math.fsum(vals)
        if abs(total - 1.0) > NORM_TOL:
            raise EnsembleError(f"{path}:{lineno}: probabilities sum to {total!r}, not 1")
        row = [0.0] * len(scheme)
        for j, v in zip(order, vals):
            row[j] = v
        if abs(sum(row) - 1.0) > DRIFT_TOL:
            row = [v / total for v in row]
        if not cells[0]:
            raise EnsembleError(f"{path}:{lineno}: empty post id")
        ids.append(cells[0])
        rows.append(row)
    if len(set(ids)) != len(ids):
        seen = set()
        dup = next(i for i in ids if i in seen or seen.add(i))
        raise EnsembleError(f"{path}: duplicate post id {dup!r}")
    probs = np.array(rows, dtype=np.float64).reshape(len(rows), len(scheme))
    return PredictionSet(model_id or path.stem, scheme, tuple(ids), probs)
