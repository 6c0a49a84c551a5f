"""Confusion matrices and the weighted-F1 report."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Label, LabelScheme


class EvalError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are true labels, columns predicted, both in scheme order."""
    scheme: LabelScheme
    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        k = len(self.scheme)
        if c.shape != (k, k) or (c < 0).any():
            raise EvalError(f"counts must be a non-negative {k}x{k} matrix")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        return (
            isinstance(other, ConfusionMatrix)
            and self.scheme == other.scheme
            and np.array_equal(self.counts, other.counts)
        )


def confusion(y_true: Sequence[Label], y_pred: Sequence[Label], scheme: LabelScheme) -> ConfusionMatrix:
    if len(y_true) != len(y_pred):
        raise EvalError(f"{len(y_true)} gold labels but {len(y_pred)} predictions")
    if not y_true:
        raise EvalError("nothing to evaluate")
    k = len(scheme)
    counts = np.zeros((k, k), dtype=np.int64)
    for i, (t, p) in enumerate(zip(y_true, y_pred)):
        for lab in (t, p):
            if lab not in scheme:
                raise EvalError(f"item {i}: label {lab} not in scheme {scheme.name!r}")
        counts[scheme.index(t), scheme.index(p)] += 1
    return ConfusionMatrix(scheme, counts)


@dataclass(frozen=True)
class ClassStats:
    label: Label
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    per_class: tuple[ClassStats, ...]
    accuracy: float
    macro_f1: float
    weighted_f1: float
    total: int

    def as_dict(self) -> dict[str, float]:
        out = {
            "weighted_f1": self.weighted_f1,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "n": self.total,
        }
        for s in self.per_class:
            key = s.label.render().lower()
            out[f"precision.{key}"] = s.precision
            out[f"recall.{key}"] = s.recall
            out[f"f1.{key}"] = s.f1
            out[f"support.{key}"] = s.support
        return out

    def to_keyvalue(self) -> str:
        lines = []
        for k, v in self.as_dict().items():
            lines.append(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}")
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        width = max(len(s.label.render()) for s in self.per_class)
        width = max(width, len("weighted avg"))
        head = f"{'':<{width}}  precision  recall  f1-score  support"
        rows = [head]
        for s in self.per_class:
            rows.append(f"{s.label.render():<{width}}  {s.precision:9.4f}  {s.recall:6.4f}  {s.f1:8.4f}  {s.support:7d}")
        rows.append("")
        rows.append(f"{'accuracy':<{width}}  {'':9}  {'':6}  {self.accuracy:8.4f}  {self.total:7d}")
        rows.append(f"{'macro avg':<{width}}  {'':9}  {'':6}  {self.macro_f1:8.4f}  {self.total:7d}")
        rows.append(f"{'weighted avg':<{width}}  {'':9}  {'':6}  {self.weighted_f1:8.4f}  {self.total:7d}")
        return "\n".join(rows) + "\n"


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def report(cm: ConfusionMatrix) -> EvalReport:
    """Per-class precision/recall/F1 with the 0/0 -> 0 convention.

    Macro and weighted averages run over classes with nonzero support only.
    """
    counts = cm.counts
    tp = np.diag(counts)
    pred = counts.sum(axis=0)
    true = counts.sum(axis=1)
    stats = []
    for i, label in enumerate(cm.scheme.labels):
        p = _ratio(tp[i], pred[i])
        r = _ratio(tp[i], true[i])
        f = _ratio(2 * p * r, p + r)
        stats.append(ClassStats(label, float(p), float(r), float(f), int(true[i])))
    total = int(true.sum())
    present = [s for s in stats if s.support > 0]
    weighted = _ratio(sum(s.support * s.f1 for s in present), sum(s.support for s in present))
    macro = _ratio(sum(s.f1 for s in present), len(present))
    return EvalReport(tuple(stats), _ratio(float(tp.sum()), total), float(macro), float(weighted), total)


def evaluate(y_true, y_pred, scheme: LabelScheme) -> EvalReport:
    return report(confusion(y_true, y_pred, scheme))


def weighted_f1(y_true, y_pred, scheme: LabelScheme) -> float:
    return evaluate(y_true, y_pred, scheme).weighted_f1
