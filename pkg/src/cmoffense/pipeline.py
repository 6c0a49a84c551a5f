"""Text-in, probabilities-out classifier: preprocessing, tokens, counts, model.

A fitted pipeline is saved through the ordinary model-file format as kind
``pipeline``, so one file carries everything ``predict`` needs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import features as F
from .corpus import Dataset, LabelScheme
from .ensemble import PredictionSet
from .evaluation import evaluate
from .models import ModelError, train
from .models.forest import RfModel
from .models.io import _KINDS, register_kind
from .models.mnb import MnbModel
from .models.svm import SvmModel
from .preprocess import PreprocessConfig, normalize
from .tokenize import UnigramModel

_MODEL_CLASSES = {"mnb": MnbModel, "svm": SvmModel, "rf": RfModel}


class TextEncoder:
    """Normalization followed by whitespace or subword tokenization."""

    def __init__(self, preprocess: PreprocessConfig, subword: UnigramModel | None = None):
        self.preprocess = preprocess
        self.subword = subword

    def tokens(self, text: str) -> list[str]:
        clean = normalize(text, self.preprocess)
        if self.subword is None:
            return clean.split()
        return self.subword.segment(clean)

    def tokenize_all(self, texts: Sequence[str]) -> list[list[str]]:
        return [self.tokens(t) for t in texts]

    def to_dict(self) -> dict:
        return {
            "preprocess": self.preprocess.to_dict(),
            "subword": None if self.subword is None else dict(sorted(self.subword.pieces.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TextEncoder":
        sub = d.get("subword")
        return cls(PreprocessConfig.from_dict(d["preprocess"]), UnigramModel(sub) if sub else None)


@dataclass(eq=False)
class Pipeline:
    scheme: LabelScheme
    encoder: TextEncoder
    vocab: F.Vocabulary  # selected features only, in model column order
    model: object

    kind = "pipeline"

    def matrix(self, texts: Sequence[str]):
        return F.to_csr(F.vectorize_all(self.encoder.tokenize_all(texts), self.vocab), len(self.vocab))

    def predict_proba(self, texts: Sequence[str]) -> np.ndarray:
        return self.model.predict_proba(self.matrix(texts))

    def predict_labels(self, texts: Sequence[str]):
        probs = self.predict_proba(texts)
        return [self.scheme.labels[int(i)] for i in np.argmax(probs, axis=1)]

    def predict_set(self, ds: Dataset, model_id: str) -> PredictionSet:
        return PredictionSet(model_id, self.scheme, ds.ids, self.predict_proba(ds.texts))

    def to_dict(self) -> dict:
        return {
            "encoder": self.encoder.to_dict(),
            "vocab": {"tokens": list(self.vocab.tokens), "doc_freq": list(self.vocab.doc_freq),
                      "n_docs": self.vocab.n_docs},
            "model_kind": self.model.kind,
            "model": self.model.to_dict(),
        }

    @classmethod
    def from_dict(cls, scheme: LabelScheme, d: dict) -> "Pipeline":
        v = d["vocab"]
        vocab = F.Vocabulary(tuple(v["tokens"]), tuple(v["doc_freq"]), int(v["n_docs"]))
        kind = d["model_kind"]
        if kind not in _MODEL_CLASSES:
            raise ModelError(f"unknown inner model kind {kind!r}")
        model = _MODEL_CLASSES[kind].from_dict(scheme, d["model"])
        return cls(scheme, TextEncoder.from_dict(d["encoder"]), vocab, model)


register_kind("pipeline", Pipeline)


@dataclass
class Featurized:
    """Training and validation counts over the full training vocabulary."""
    vocab: F.Vocabulary
    x_train: object
    y_train: list
    x_valid: object
    y_valid: list
    mi: F.MiScores


def featurize(train_ds: Dataset, valid_ds: Dataset | None, encoder: TextEncoder) -> Featurized:
    train_tokens = encoder.tokenize_all(train_ds.texts)
    vocab = F.build_vocabulary(train_tokens)
    vecs = F.vectorize_all(train_tokens, vocab)
    mi = F.mutual_information(vecs, train_ds.labels, train_ds.scheme)
    x_valid, y_valid = None, None
    if valid_ds is not None:
        x_valid = F.to_csr(F.vectorize_all(encoder.tokenize_all(valid_ds.texts), vocab), len(vocab))
        y_valid = list(valid_ds.labels)
    return Featurized(vocab, F.to_csr(vecs, len(vocab)), list(train_ds.labels), x_valid, y_valid, mi)


def fit(feats: Featurized, scheme: LabelScheme, encoder: TextEncoder, kind: str,
        params: dict, k: int | None = None) -> Pipeline:
    if k is None or k >= len(feats.vocab):
        sel = F.FeatureSelector.identity(len(feats.vocab))
    else:
        sel = F.select_top_k(feats.mi, k)
    x = F.project_matrix(feats.x_train, sel)
    model = train(kind, x, feats.y_train, scheme, **params)
    return Pipeline(scheme, encoder, F.select_vocabulary(feats.vocab, sel), model)


def validation_f1(pipe: Pipeline, feats: Featurized) -> float:
    """Weighted-F1 on the validation counts, reusing the already-built matrix."""
    cols = [feats.vocab.index[t] for t in pipe.vocab.tokens]
    probs = pipe.model.predict_proba(feats.x_valid[:, cols].tocsr())
    pred = [pipe.scheme.labels[int(i)] for i in np.argmax(probs, axis=1)]
    return evaluate(feats.y_valid, pred, pipe.scheme).weighted_f1


def k_grid(vocab_size: int, start: int = 1000) -> list[int]:
    """Doubling steps from ``start`` up to the vocabulary size, ending at the full size."""
    grid = []
    k = start
    while k < vocab_size:
        grid.append(k)
        k *= 2
    grid.append(vocab_size)
    return grid


def param_grid(grid: dict[str, Sequence]) -> list[dict]:
    keys = sorted(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


@dataclass
class SweepResult:
    k: int
    params: dict
    weighted_f1: float
    n_features: int


def sweep(feats: Featurized, scheme: LabelScheme, encoder: TextEncoder, kind: str,
          ks: Sequence[int], grid: dict[str, Sequence],
          log: Callable[[SweepResult], None] | None = None):
    """Train every (k, params) combination; return the best pipeline and all results.

    Ties on validation weighted-F1 keep the earlier combination.
    """
    if feats.x_valid is None:
        raise ValueError("a sweep needs validation data")
    best, best_score, results = None, -math.inf, []
    for k in ks:
        for params in param_grid(grid):
            pipe = fit(feats, scheme, encoder, kind, params, k)
            score = validation_f1(pipe, feats)
            res = SweepResult(min(k, len(feats.vocab)), params, score, len(pipe.vocab))
            results.append(res)
            if log is not None:
                log(res)
            if score > best_score:
                best, best_score = pipe, score
    return best, results
