"""Bag-of-words vocabulary, sparse count vectors and mutual-information feature selection."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Label, LabelScheme


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    doc_freq: tuple[int, ...]
    n_docs: int
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.tokens) != len(self.doc_freq):
            raise ValueError("tokens and doc_freq differ in length")
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})
        if len(self.index) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")
        if any(df < 1 or df > self.n_docs for df in self.doc_freq):
            raise ValueError("document frequencies must lie in [1, n_docs]")

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    def df(self, token: str) -> int:
        return self.doc_freq[self.index[token]]


def build_vocabulary(docs: Sequence[Sequence[str]]) -> Vocabulary:
    """Vocabulary over all tokens, indexed in order of first appearance."""
    if not docs:
        raise ValueError("cannot build a vocabulary from zero documents")
    index: dict[str, int] = {}
    df: list[int] = []
    for doc in docs:
        seen = set()
        for tok in doc:
            if tok in seen:
                continue
            seen.add(tok)
            i = index.get(tok)
            if i is None:
                index[tok] = len(df)
                df.append(1)
            else:
                df[i] += 1
    return Vocabulary(tuple(index), tuple(df), len(docs))


@dataclass(frozen=True)
class CountVector:
    entries: tuple[tuple[int, int], ...]
    size: int

    def __post_init__(self):
        prev = -1
        for i, c in self.entries:
            if not prev < i < self.size:
                raise ValueError(f"indices must be strictly increasing and < {self.size}")
            if c < 1:
                raise ValueError("counts must be positive")
            prev = i

    def __len__(self):
        return len(self.entries)

    def total(self) -> int:
        return sum(c for _, c in self.entries)

    def indices(self) -> list[int]:
        return [i for i, _ in self.entries]


def vectorize(doc: Iterable[str], vocab: Vocabulary) -> CountVector:
    counts = Counter(vocab.index[t] for t in doc if t in vocab.index)
    return CountVector(tuple(sorted(counts.items())), len(vocab))


def vectorize_all(docs: Iterable[Iterable[str]], vocab: Vocabulary) -> list[CountVector]:
    return [vectorize(d, vocab) for d in docs]


def to_csr(vectors: Sequence[CountVector], size: int | None = None) -> sp.csr_matrix:
    """Stack count vectors into a (docs x features) CSR matrix."""
    if size is None:
        size = vectors[0].size if vectors else 0
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for v in vectors:
        if v.size != size:
            raise ValueError(f"vector of size {v.size} in a matrix of width {size}")
        for i, c in v.entries:
            indices.append(i)
            data.append(c)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(vectors), size),
    )


def label_indices(labels: Sequence[Label], scheme: LabelScheme) -> np.ndarray:
    try:
        return np.asarray([scheme.index(l) for l in labels], dtype=np.int64)
    except ValueError:
        bad = next(l for l in labels if l not in scheme)
        raise ValueError(f"label {bad} is not in scheme {scheme.name!r}") from None


@dataclass(frozen=True)
class MiScores:
    """Per-feature mutual information (nats) between presence and class."""
    values: np.ndarray
    n_docs: int
    class_counts: tuple[int, ...]

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return float(self.values[i])


def mutual_information(
    vectors: Sequence[CountVector], labels: Sequence[Label], scheme: LabelScheme,
    clamp: bool = True,
) -> MiScores:
    """MI between binary document presence of each feature and the class.

    Maximum-likelihood estimates from document counts; cells with zero
    joint count contribute nothing.
    """
    if len(vectors) != len(labels):
        raise ValueError(f"{len(vectors)} vectors but {len(labels)} labels")
    if not vectors:
        raise ValueError("mutual information needs at least one document")
    y = label_indices(labels, scheme)
    x = to_csr(vectors)
    n, n_features = x.shape
    n_classes = len(scheme)
    presence = x.copy()
    presence.data[:] = 1.0
    onehot = sp.csr_matrix(
        (np.ones(n), (np.arange(n), y)), shape=(n, n_classes)
    )
    # n11[f, c]: docs of class c containing f
    n11 = np.asarray((presence.T @ onehot).todense(), dtype=np.float64)
    n_c = np.bincount(y, minlength=n_classes).astype(np.float64)
    n_1 = n11.sum(axis=1)
    n01 = n_c[None, :] - n11
    n_0 = n - n_1
    mi = np.zeros(n_features)
    with np.errstate(divide="ignore", invalid="ignore"):
        for joint, marginal in ((n11, n_1), (n01, n_0)):
            ratio = joint * n / (marginal[:, None] * n_c[None, :])
            term = np.where(joint > 0, joint / n * np.log(np.where(joint > 0, ratio, 1.0)), 0.0)
            mi += term.sum(axis=1)
    if clamp:
        mi = np.maximum(mi, 0.0)
    return MiScores(mi, n, tuple(int(c) for c in n_c))


@dataclass(frozen=True)
class FeatureSelector:
    k: int
    selected: tuple[int, ...]  # original indices, increasing
    size: int                  # original feature space width
    remap: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "remap", {orig: new for new, orig in enumerate(self.selected)})

    def __len__(self):
        return len(self.selected)

    @classmethod
    def identity(cls, size: int) -> "FeatureSelector":
        return cls(max(size, 1), tuple(range(size)), size)


def select_top_k(scores: MiScores, k: int) -> FeatureSelector:
    """The k highest-scoring features; equal scores go to the lower index."""
    if k < 1:
        raise ValueError("k must be at least 1")
    values = np.asarray(scores.values)
    n = len(values)
    # stable sort on -score keeps lower indices first among ties
    order = np.argsort(-values, kind="stable")[: min(k, n)]
    return FeatureSelector(k, tuple(sorted(int(i) for i in order)), n)


def project(vec: CountVector, sel: FeatureSelector) -> CountVector:
    remap = sel.remap
    return CountVector(
        tuple((remap[i], c) for i, c in vec.entries if i in remap), len(sel.selected)
    )


def project_matrix(x: sp.csr_matrix, sel: FeatureSelector) -> sp.csr_matrix:
    return x[:, list(sel.selected)].tocsr()


def select_vocabulary(vocab: Vocabulary, sel: FeatureSelector) -> Vocabulary:
    """The vocabulary restricted to the selected features, in compact order."""
    return Vocabulary(
        tuple(vocab.tokens[i] for i in sel.selected),
        tuple(vocab.doc_freq[i] for i in sel.selected),
        vocab.n_docs,
    )


def write_scores(scores: MiScores, vocab: Vocabulary, path) -> None:
    """TSV of ``token<TAB>score`` sorted by descending score."""
    order = np.argsort(-np.asarray(scores.values), kind="stable")
    with open(path, "w", encoding="utf-8", newline="") as f:
        for i in order:
            f.write(f"{vocab.tokens[i]}\t{float(scores.values[i])!r}\n")
