import numpy as np
import pytest

from cmoffense.cli import main
from cmoffense.corpus import COMBINED, TAMIL, Dataset, Label, Post, load_dataset, save_dataset
from cmoffense.ensemble import load_predictions
from cmoffense.models import load_model

from conftest import synthetic_posts, write_lines


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def data_dir(tmp_path):
    save_dataset(Dataset(TAMIL, tuple(synthetic_posts(100, seed=1)), "t"), tmp_path / "all.tsv")
    save_dataset(Dataset(TAMIL, tuple(synthetic_posts(20, seed=2, signal=0.9)), "t"), tmp_path / "train20.tsv")
    save_dataset(Dataset(TAMIL, tuple(synthetic_posts(12, seed=3, signal=0.9)), "t"), tmp_path / "valid12.tsv")
    return tmp_path


def indicator_posts(n, seed):
    """Class depends only on whether the token 'zorblat' appears; everything else is noise."""
    rng = np.random.default_rng(seed)
    noise = [f"noise{i}" for i in range(30)]
    posts = []
    for i in range(n):
        words = list(rng.choice(noise, size=5))
        label = Label.NOT_OFFENSIVE
        if i % 2:
            words.insert(int(rng.integers(0, 5)), "zorblat")
            label = Label.OFFENSIVE_UNTARGETED
        posts.append(Post(f"{seed}-{i}", " ".join(words), label))
    return Dataset(TAMIL, tuple(posts), "ind")


def test_split(capsys, data_dir):
    code, out, _ = run(capsys, "split", data_dir / "all.tsv", "-o", data_dir / "s1", "--seed", 4)
    assert code == 0
    sizes = [len(load_dataset(data_dir / "s1" / f"{n}.tsv", TAMIL)) for n in ("train", "valid", "test")]
    assert sizes == [80, 10, 10]
    assert (data_dir / "s1" / "config.resolved.ini").exists()
    assert run(capsys, "split", data_dir / "all.tsv", "-o", data_dir / "s2", "--seed", 4)[0] == 0
    for n in ("train.tsv", "valid.tsv", "test.tsv", "config.resolved.ini"):
        assert (data_dir / "s1" / n).read_bytes() == (data_dir / "s2" / n).read_bytes()


def test_split_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "split", tmp_path / "nope.tsv", "-o", tmp_path / "o")
    assert code == 1
    assert "nope.tsv" in err


def test_usage_errors(capsys, data_dir, tmp_path):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "split", data_dir / "all.tsv", "-o", tmp_path / "o", "--set", "run.nothing=1")[0] == 2
    assert run(capsys, "split", data_dir / "all.tsv", "-o", tmp_path / "o", "--ratios", "0.5,0.1")[0] == 2
    assert run(capsys, "split", data_dir / "all.tsv", "-o", tmp_path / "o", "--config", tmp_path / "none.ini")[0] == 2


def test_train_mnb_smoke(capsys, data_dir):
    code, out, _ = run(capsys, "train", "--train", data_dir / "train20.tsv", "--valid", data_dir / "valid12.tsv",
                       "-o", data_dir / "mnb", "--model", "mnb")
    assert code == 0
    assert "weighted_f1=" in out
    score = float(out.split("weighted_f1=")[1].split()[0])
    assert 0.0 <= score <= 1.0
    assert (data_dir / "mnb" / "model.cmof").read_text().startswith("CMOF-MODEL v1 pipeline\n")
    resolved = (data_dir / "mnb" / "config.resolved.ini").read_text()
    assert "kind = mnb" in resolved and "lowercase = true" in resolved


def test_unknown_model_kind(capsys, data_dir, tmp_path):
    code, _, err = run(capsys, "train", "--train", data_dir / "train20.tsv", "-o", tmp_path / "x", "--model", "knn")
    assert code == 2
    code, _, err = run(capsys, "train", "--train", data_dir / "train20.tsv", "-o", tmp_path / "x",
                       "--set", "model.kind=knn")
    assert code == 2 and "knn" in err


def test_sweep_selects_indicator(capsys, tmp_path):
    save_dataset(indicator_posts(40, 1), tmp_path / "train.tsv")
    save_dataset(indicator_posts(20, 2), tmp_path / "valid.tsv")
    code, out, _ = run(capsys, "sweep", "--train", tmp_path / "train.tsv", "--valid", tmp_path / "valid.tsv",
                       "-o", tmp_path / "sw", "--model", "mnb", "--k-grid", "2,all", "--preset", "none")
    assert code == 0
    lines = (tmp_path / "sw" / "sweep.tsv").read_text().splitlines()
    rows = [dict(zip(lines[0].split("\t"), l.split("\t"))) for l in lines[1:]]
    assert {r["k"] for r in rows} == {"2", "31"}
    best = max(float(r["weighted_f1"]) for r in rows)
    assert f"weighted_f1={best:.4f}" in out
    pipe = load_model(tmp_path / "sw" / "model.cmof")
    assert "zorblat" in pipe.vocab
    mi = (tmp_path / "sw" / "mi_scores.tsv").read_text().splitlines()
    assert mi[0].startswith("zorblat\t")
    resolved = (tmp_path / "sw" / "config.resolved.ini").read_text()
    assert f"k = {len(pipe.vocab)}" in resolved


def test_sweep_needs_validation(capsys, data_dir, tmp_path):
    assert run(capsys, "sweep", "--train", data_dir / "train20.tsv", "-o", tmp_path / "s")[0] == 2


def test_overfit_forest_predict_evaluate(capsys, tmp_path):
    posts = [Post(str(i), f"uniq{i} " + " ".join(p.text.split()[:3]), p.label)
             for i, p in enumerate(synthetic_posts(40, seed=5))]
    save_dataset(Dataset(TAMIL, tuple(posts), "t"), tmp_path / "train.tsv")
    code, _, _ = run(capsys, "train", "--train", tmp_path / "train.tsv", "-o", tmp_path / "rf", "--model", "rf",
                     "--n-trees", 1, "--set", "model.bootstrap=false", "--threads", 1)
    assert code == 0
    code, _, _ = run(capsys, "predict", "--model", tmp_path / "rf" / "model.cmof", "--input", tmp_path / "train.tsv",
                     "-o", tmp_path / "rf.tsv")
    assert code == 0
    code, out, _ = run(capsys, "evaluate", "--pred", tmp_path / "rf.tsv", "--gold", tmp_path / "train.tsv")
    assert code == 0
    assert "weighted_f1=1.0000" in out


def _predictions(capsys, data_dir):
    run(capsys, "train", "--train", data_dir / "train20.tsv", "-o", data_dir / "m", "--model", "mnb")
    code, _, _ = run(capsys, "predict", "--model", data_dir / "m" / "model.cmof", "--input", data_dir / "valid12.tsv",
                     "-o", data_dir / "p.tsv")
    assert code == 0
    return data_dir / "p.tsv"


def test_ensemble_with_itself(capsys, data_dir):
    pred = _predictions(capsys, data_dir)
    code, _, _ = run(capsys, "ensemble", pred, pred, "-o", data_dir / "e.tsv")
    assert code == 0
    a, b = load_predictions(pred), load_predictions(data_dir / "e.tsv")
    assert a.ids == b.ids
    assert np.abs(a.probs - b.probs).max() <= 1e-15
    assert run(capsys, "ensemble", pred, "-o", data_dir / "e1.tsv")[0] == 2
    assert run(capsys, "ensemble", pred, pred, "-o", data_dir / "e2.tsv", "--weights", "1")[0] == 2


def test_evaluate_mismatched_ids(capsys, data_dir):
    pred = _predictions(capsys, data_dir)
    lines = pred.read_text().splitlines()
    first_id = lines[1].split("\t")[0]
    write_lines(data_dir / "short.tsv", [lines[0]] + lines[2:])
    code, _, err = run(capsys, "evaluate", "--pred", data_dir / "short.tsv", "--gold", data_dir / "valid12.tsv")
    assert code == 1
    assert repr(first_id) in err
    code, _, _ = run(capsys, "ensemble", pred, data_dir / "short.tsv", "-o", data_dir / "bad.tsv")
    assert code == 1


OLID_ROWS = [
    "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c",
    "1\tnice day\tNOT\tNULL\tNULL",
    "2\tthis sucks\tOFF\tUNT\tNULL",
    "3\t@user you fool\tOFF\tTIN\tIND",
    "4\tthose people\tOFF\tTIN\tGRP",
    "5\tthe show is trash\tOFF\tTIN\tOTH",
]


def test_transfer_prep(capsys, tmp_path):
    write_lines(tmp_path / "olid.tsv", OLID_ROWS)
    task = [Post("a", "semma padam", Label.NOT_OFFENSIVE), Post("b", "hindi text", Label.NOT_IN_LANGUAGE),
            Post("c", "mokka", Label.OFFENSIVE_UNTARGETED), Post("d", "another", Label.NOT_IN_LANGUAGE)]
    save_dataset(Dataset(TAMIL, tuple(task), "ta"), tmp_path / "ta.tsv")
    code, out, _ = run(capsys, "transfer-prep", "--olid", tmp_path / "olid.tsv", "-o", tmp_path / "olid_only.tsv")
    assert code == 0
    ds = load_dataset(tmp_path / "olid_only.tsv", COMBINED)
    assert ds.labels == [Label.NOT_OFFENSIVE, Label.OFFENSIVE_UNTARGETED, Label.OFFENSIVE_TARGETED_INDIVIDUAL,
                         Label.OFFENSIVE_TARGETED_GROUP, Label.OFFENSIVE_TARGETED_OTHER]
    code, _, _ = run(capsys, "transfer-prep", "--olid", tmp_path / "olid.tsv", "--task", "tamil", tmp_path / "ta.tsv",
                     "-o", tmp_path / "all.tsv")
    assert code == 0
    ds = load_dataset(tmp_path / "all.tsv", COMBINED)
    assert len(ds) == 7
    assert Label.NOT_IN_LANGUAGE not in ds.labels
    assert run(capsys, "transfer-prep", "-o", tmp_path / "none.tsv")[0] == 2


def test_train_tokenizer_and_subword_training(capsys, data_dir):
    code, out, _ = run(capsys, "train-tokenizer", data_dir / "all.tsv", "-o", data_dir / "tok" / "uni.txt",
                       "--target-vocab", 60)
    assert code == 0
    assert (data_dir / "tok" / "uni.txt").exists()
    code, out, _ = run(capsys, "train", "--train", data_dir / "train20.tsv", "--valid", data_dir / "valid12.tsv",
                       "-o", data_dir / "sub", "--model", "svm", "--tokenizer", data_dir / "tok" / "uni.txt")
    assert code == 0 and "weighted_f1=" in out
