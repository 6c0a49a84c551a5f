import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmoffense.corpus import COMBINED, MALAYALAM, TAMIL, Label
from cmoffense.ensemble import (
    EnsembleConfig, EnsembleError, PredictionSet, average, decode, load_predictions,
    save_predictions, widen,
)


def random_set(rng, n, scheme=TAMIL, model_id="m", ids=None):
    probs = rng.dirichlet(np.ones(len(scheme)), size=n)
    return PredictionSet(model_id, scheme, ids or [f"p{i}" for i in range(n)], probs)


def one_hot(model_id, ids, hot, scheme=TAMIL):
    probs = np.zeros((len(ids), len(scheme)))
    probs[np.arange(len(ids)), hot] = 1.0
    return PredictionSet(model_id, scheme, ids, probs)


def test_average_identical_sets():
    s = random_set(np.random.default_rng(0), 50)
    out = average([s, s])
    assert np.abs(out.probs - s.probs).max() <= 1e-15
    assert out.model_id == "m+m"


def test_average_three_copies():
    rng = np.random.default_rng(1)
    for _ in range(20):
        s = random_set(rng, 40)
        out = average([s, s, s])
        assert np.abs(out.probs - s.probs).max() <= 1e-15


def test_average_opposite_one_hots():
    two = PredictionSet("a", MALAYALAM, ["x"], [[1, 0, 0, 0, 0]])
    other = PredictionSet("b", MALAYALAM, ["x"], [[0, 1, 0, 0, 0]])
    assert average([two, other]).probs[0].tolist() == [0.5, 0.5, 0, 0, 0]


def test_disjoint_one_hots_give_exact_means():
    ids = [f"q{i}" for i in range(6)]
    sets = [one_hot(f"m{k}", ids, [(i + k) % 6 for i in range(6)]) for k in range(4)]
    out = average(sets)
    for row in out.probs:
        assert sorted(row.tolist()) == [0.0, 0.0, 0.25, 0.25, 0.25, 0.25]


def test_weighted_hand_mean():
    ids = ["a"]
    s1 = PredictionSet("s1", MALAYALAM, ids, [[0.2, 0.3, 0.5, 0, 0]])
    s2 = PredictionSet("s2", MALAYALAM, ids, [[0.6, 0.2, 0.2, 0, 0]])
    s3 = PredictionSet("s3", MALAYALAM, ids, [[0.1, 0.1, 0.8, 0, 0]])
    out = average([s1, s2, s3], EnsembleConfig(("s1", "s2", "s3"), (1, 1, 2)))
    want = [(0.2 + 0.6 + 0.2) / 4, (0.3 + 0.2 + 0.2) / 4, (0.5 + 0.2 + 1.6) / 4, 0, 0]
    assert np.abs(out.probs[0] - want).max() <= 1e-12


def test_alignment_by_id():
    rng = np.random.default_rng(2)
    s = random_set(rng, 30)
    order = rng.permutation(30)
    shuffled = PredictionSet("r", TAMIL, [s.ids[i] for i in order], s.probs[order])
    out = average([s, shuffled])
    assert out.ids == s.ids
    assert np.abs(out.probs - s.probs).max() <= 1e-15


def test_first_member_weight():
    rng = np.random.default_rng(3)
    sets = [random_set(rng, 25, model_id=f"m{k}") for k in range(3)]
    out = average(sets, EnsembleConfig(("m0", "m1", "m2"), (3.0, 0.0, 0.0)))
    assert np.abs(out.probs - sets[0].probs).max() <= 1e-15


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_member_permutation_invariance(seed, k):
    rng = np.random.default_rng(seed)
    sets = [random_set(rng, 10, model_id=f"m{i}") for i in range(k)]
    w = rng.uniform(0.1, 5.0, size=k)
    a = average(sets, EnsembleConfig(tuple(s.model_id for s in sets), tuple(w)))
    perm = rng.permutation(k)
    b = average([sets[i] for i in perm], EnsembleConfig(tuple(sets[i].model_id for i in perm), tuple(w[perm])))
    assert np.abs(a.probs - b.probs).max() <= 1e-12
    assert np.all(np.abs(a.probs.sum(axis=1) - 1) <= 1e-9)


def test_average_errors():
    rng = np.random.default_rng(4)
    a = random_set(rng, 5)
    with pytest.raises(EnsembleError, match="'p4'"):
        average([a, random_set(rng, 4, model_id="short")])
    with pytest.raises(EnsembleError, match="'zz'"):
        average([a, random_set(rng, 6, ids=["p0", "p1", "zz", "p2", "p3", "p4"])])
    with pytest.raises(EnsembleError, match="scheme"):
        average([a, random_set(rng, 5, scheme=MALAYALAM)])
    with pytest.raises(EnsembleError):
        average([])
    with pytest.raises(EnsembleError):
        EnsembleConfig(("a", "b"), (1.0,))
    with pytest.raises(EnsembleError):
        EnsembleConfig(("a",), (-1.0,))
    with pytest.raises(EnsembleError):
        average([a], EnsembleConfig(("nope",)))


def test_prediction_set_validation():
    with pytest.raises(EnsembleError):
        PredictionSet("m", MALAYALAM, ["a", "a"], np.full((2, 5), 0.2))
    with pytest.raises(EnsembleError):
        PredictionSet("m", MALAYALAM, ["a"], [[0.5, 0.1, 0, 0, 0]])


def test_decode():
    ids = ["a", "b", "c"]
    assert [l for _, l in decode(one_hot("m", ids, [3, 0, 5]))] == [TAMIL.labels[3], TAMIL.labels[0], TAMIL.labels[5]]
    uniform = PredictionSet("u", TAMIL, ["x"], np.full((1, 6), 1 / 6))
    assert decode(uniform)[0][1] == TAMIL.labels[0]
    rng = np.random.default_rng(5)
    s = random_set(rng, 200)
    for (i, label), row in zip(decode(s), s.probs):
        best = 0
        for j in range(len(row)):
            if row[j] > row[best]:
                best = j
        assert label == TAMIL.labels[best]


def test_widen():
    s = PredictionSet("m", COMBINED, ["a"], [[0.2, 0.2, 0.2, 0.2, 0.2]])
    w = widen(s, TAMIL)
    assert w.probs[0, TAMIL.index(Label.NOT_IN_LANGUAGE)] == 0.0
    with pytest.raises(EnsembleError):
        widen(random_set(np.random.default_rng(0), 2), COMBINED)


def test_file_round_trip(tmp_path):
    s = random_set(np.random.default_rng(6), 1000)
    path = tmp_path / "svm.tsv"
    save_predictions(s, path)
    back = load_predictions(path)
    assert back.model_id == "svm" and back.ids == s.ids
    assert back.scheme.labels == TAMIL.labels
    assert np.abs(back.probs - s.probs).max() <= 1e-15
    assert path.read_text().endswith("\n")


def test_file_columns_realigned(tmp_path):
    labels = [l.render() for l in MALAYALAM.labels]
    path = tmp_path / "x.tsv"
    path.write_text("id\t" + "\t".join(reversed(labels)) + "\nq\t0\t0\t0\t0.25\t0.75\n")
    s = load_predictions(path)
    assert s.scheme.labels == MALAYALAM.labels
    assert s.probs[0].tolist() == [0.75, 0.25, 0, 0, 0]


def test_file_errors(tmp_path):
    head = "id\t" + "\t".join(l.render() for l in MALAYALAM.labels) + "\n"
    cases = {
        "sum": head + "a\t0.2\t0.2\t0.2\t0.2\t0.2\nb\t0.2\t0.2\t0.2\t0.2\t0.0\n",
        "cols": head + "a\t0.5\t0.5\n",
        "nl": head + "a\t1\t0\t0\t0\t0",
        "range": head + "a\t1.5\t-0.5\t0\t0\t0\n",
        "dup": head + "a\t1\t0\t0\t0\t0\na\t1\t0\t0\t0\t0\n",
        "head": "post\tx\n",
        "label": "id\tNOPE\n",
    }
    for name, text in cases.items():
        (tmp_path / f"{name}.tsv").write_text(text)
        with pytest.raises(EnsembleError) as exc:
            load_predictions(tmp_path / f"{name}.tsv")
        if name == "sum":
            assert ":3:" in str(exc.value)
    (tmp_path / "ok.tsv").write_text(head + "a\t1\t0\t0\t0\t0\n")
    with pytest.raises(EnsembleError):
        load_predictions(tmp_path / "ok.tsv", scheme=TAMIL)
    with pytest.raises(EnsembleError):
        load_predictions(tmp_path / "missing.tsv")
