import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmoffense.corpus import COMBINED, TAMIL, LabelScheme, Label
from cmoffense.features import (
    CountVector, FeatureSelector, MiScores, build_vocabulary, mutual_information, project,
    project_matrix, select_top_k, select_vocabulary, to_csr, vectorize, vectorize_all, write_scores,
)

TWO = LabelScheme("two", (Label.NOT_OFFENSIVE, Label.OFFENSIVE_UNTARGETED))


def brute_mi(docs, labels):
    """MI per token from an explicit 2 x |C| table of document counts."""
    n = len(docs)
    classes = sorted(set(labels), key=lambda l: l.value)
    tokens = sorted({t for d in docs for t in d})
    out = {}
    for t in tokens:
        total = 0.0
        for u in (0, 1):
            n_u = sum(1 for d in docs if (t in d) == bool(u))
            for c in classes:
                n_c = sum(1 for l in labels if l == c)
                n_uc = sum(1 for d, l in zip(docs, labels) if (t in d) == bool(u) and l == c)
                if n_uc:
                    total += n_uc / n * math.log((n_uc / n) / ((n_u / n) * (n_c / n)))
        out[t] = total
    return out


def random_fixture(rng, n_docs, n_tokens, n_classes):
    alphabet = [f"t{i}" for i in range(n_tokens)]
    docs = [[rng.choice(alphabet) for _ in range(rng.randint(0, 5))] for _ in range(n_docs)]
    labels = [TAMIL.labels[rng.randrange(n_classes)] for _ in range(n_docs)]
    return docs, labels


def test_build_vocabulary_examples():
    v = build_vocabulary([["a", "b"], ["b"]])
    assert len(v) == 2 and v.df("a") == 1 and v.df("b") == 2
    assert v.tokens == ("a", "b")
    assert len(build_vocabulary([[]])) == 0
    v = build_vocabulary([["x", "x", "x"], ["x"], ["y", "x"]])
    assert v.df("x") == 3 and v.n_docs == 3
    with pytest.raises(ValueError):
        build_vocabulary([])


def test_first_appearance_order():
    v = build_vocabulary([["c", "a"], ["b", "a", "d"]])
    assert v.tokens == ("c", "a", "b", "d")
    assert [v.index[t] for t in v.tokens] == [0, 1, 2, 3]


def test_vectorize_examples():
    v = build_vocabulary([["a", "b"]])
    assert vectorize(["a", "a", "b"], v).entries == ((0, 2), (1, 1))
    assert vectorize(["z"], v).entries == ()


def test_vectorize_recount():
    rng = random.Random(1)
    docs, _ = random_fixture(rng, 50, 15, 2)
    v = build_vocabulary(docs[:25])
    for d in docs:
        vec = vectorize(d, v)
        assert vec.total() == sum(1 for t in d if t in v)
        assert vec.indices() == sorted(vec.indices())


def test_count_vector_invariants():
    with pytest.raises(ValueError):
        CountVector(((1, 1), (0, 1)), 3)
    with pytest.raises(ValueError):
        CountVector(((3, 1),), 3)
    with pytest.raises(ValueError):
        CountVector(((0, 0),), 3)


def test_to_csr():
    v = build_vocabulary([["a", "b", "c"]])
    x = to_csr(vectorize_all([["a", "c", "c"], [], ["b"]], v))
    assert x.toarray().tolist() == [[1, 0, 2], [0, 0, 0], [0, 1, 0]]


def _mi(docs, labels, scheme=TAMIL, clamp=True):
    v = build_vocabulary(docs)
    return v, mutual_information(vectorize_all(docs, v), labels, scheme, clamp=clamp)


def test_mi_constant_presence_is_zero():
    docs = [["x", "a"], ["x"], ["x", "b"], ["x"]]
    labels = [TWO.labels[0], TWO.labels[1], TWO.labels[0], TWO.labels[1]]
    v, mi = _mi(docs, labels, TWO)
    assert mi[v.index["x"]] == 0.0


def test_mi_perfect_indicator_is_ln2():
    docs = [["a"], ["a", "q"], ["q", "z"], ["z", "q"]]
    labels = [TWO.labels[0], TWO.labels[0], TWO.labels[1], TWO.labels[1]]
    v, mi = _mi(docs, labels, TWO)
    assert abs(mi[v.index["z"]] - math.log(2)) <= 1e-12
    assert abs(mi[v.index["a"]] - math.log(2)) <= 1e-12
    assert select_top_k(MiScores(np.array([mi[v.index["z"]]]), 4, (2, 2)), 1).selected == (0,)
    sel = select_top_k(mi, 1)
    assert v.tokens[sel.selected[0]] == "a"  # tie with "z" goes to the lower index


def test_mi_matches_brute_force_oracle():
    rng = random.Random(42)
    for _ in range(200):
        docs, labels = random_fixture(rng, rng.randint(1, 20), rng.randint(1, 6), rng.randint(1, 3))
        if not any(docs):
            docs[0] = ["t0"]
        v, mi = _mi(docs, labels)
        want = brute_mi([set(d) for d in docs], labels)
        for t, i in v.index.items():
            assert abs(mi[i] - max(want[t], 0.0)) <= 1e-12


def test_mi_unclamped_never_below_tolerance():
    rng = random.Random(3)
    for _ in range(100):
        docs, labels = random_fixture(rng, rng.randint(2, 20), 6, 3)
        if not any(docs):
            continue
        _, mi = _mi(docs, labels, clamp=False)
        assert np.all(mi.values >= -1e-12) and np.all(np.isfinite(mi.values))


def test_mi_invariant_under_class_permutation():
    rng = random.Random(8)
    perm = {TAMIL.labels[0]: TAMIL.labels[2], TAMIL.labels[1]: TAMIL.labels[0], TAMIL.labels[2]: TAMIL.labels[1]}
    for _ in range(50):
        docs, labels = random_fixture(rng, 20, 6, 3)
        if not any(docs):
            continue
        _, a = _mi(docs, labels)
        _, b = _mi(docs, [perm[l] for l in labels])
        assert np.allclose(a.values, b.values, atol=1e-12, rtol=0)


def test_mi_oov_document_changes_denominators():
    docs = [["a"], ["a", "b"], ["b"], ["c"]]
    labels = [TAMIL.labels[0], TAMIL.labels[0], TAMIL.labels[1], TAMIL.labels[1]]
    v = build_vocabulary(docs)
    vecs = vectorize_all(docs, v)
    extra = vectorize(["zzz", "yyy"], v)
    assert extra.entries == ()
    mi = mutual_information(vecs + [extra], labels + [TAMIL.labels[1]], TAMIL)
    want = brute_mi([set(d) & set(v.tokens) for d in docs + [["zzz"]]], labels + [TAMIL.labels[1]])
    for t, i in v.index.items():
        assert abs(mi[i] - want[t]) <= 1e-12
    assert mi.n_docs == 5


def test_mi_errors():
    v = build_vocabulary([["a"]])
    with pytest.raises(ValueError):
        mutual_information(vectorize_all([["a"]], v), [], TAMIL)
    with pytest.raises(ValueError):
        mutual_information(vectorize_all([["a"]], v), [Label.NOT_IN_LANGUAGE], COMBINED)


def test_select_top_k_examples():
    scores = MiScores(np.array([0.5, 0.1, 0.5]), 3, (3,))
    assert select_top_k(scores, 2).selected == (0, 2)
    sel = select_top_k(scores, 5)
    assert sel.selected == (0, 1, 2) and len(sel) == 3
    with pytest.raises(ValueError):
        select_top_k(scores, 0)


@given(st.lists(st.sampled_from([0.0, 0.25, 0.5, 1.0]), min_size=1, max_size=12), st.integers(1, 14))
def test_select_top_k_properties(vals, k):
    scores = MiScores(np.array(vals), 1, (1,))
    sel = select_top_k(scores, k)
    assert len(sel) == min(k, len(vals))
    assert sorted(sel.remap.values()) == list(range(len(sel)))
    assert list(sel.selected) == sorted(sel.selected)
    # oracle: sort by (-score, index)
    want = sorted(sorted(range(len(vals)), key=lambda i: (-vals[i], i))[:k])
    assert list(sel.selected) == want
    assert select_top_k(scores, k) == sel


def test_project_examples():
    sel = FeatureSelector(1, (3,), 4)
    assert project(CountVector(((0, 2), (3, 1)), 4), sel).entries == ((0, 1),)
    assert project(CountVector((), 4), sel).entries == ()
    once = project(CountVector(((0, 2), (3, 1)), 4), FeatureSelector(2, (0, 3), 4))
    assert project(once, FeatureSelector.identity(2)) == once


def test_project_matrix_agrees_with_project():
    rng = random.Random(4)
    docs, labels = random_fixture(rng, 30, 10, 3)
    v, mi = _mi(docs, labels)
    sel = select_top_k(mi, 4)
    vecs = vectorize_all(docs, v)
    x = project_matrix(to_csr(vecs), sel)
    assert (x != to_csr([project(vec, sel) for vec in vecs], len(sel))).nnz == 0
    sub = select_vocabulary(v, sel)
    assert sub.tokens == tuple(v.tokens[i] for i in sel.selected)


def test_write_scores(tmp_path):
    v = build_vocabulary([["a", "b", "c"]])
    write_scores(MiScores(np.array([0.1, 0.3, 0.1]), 1, (1,)), v, tmp_path / "s.tsv")
    assert (tmp_path / "s.tsv").read_text() == "b\t0.3\na\t0.1\nc\t0.1\n"
