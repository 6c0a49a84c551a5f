import random
from pathlib import Path

import pytest

from cmoffense.corpus import TAMIL, Dataset, Post

DATA = Path(__file__).parent / "data"

# toy code-mixed vocabulary per class, used for synthetic corpora
CLASS_WORDS = {
    0: "padam super nalla movie semma mass thalaivar".split(),
    1: "waste mokka kevalam worst flop".split(),
    2: "loosu avan idiot fool dei".split(),
    5: "hindi wala bhai kya yaar".split(),
}
FILLER = "the a is @user this trailer 😀 !! and".split()


def synthetic_posts(n, seed=0, length=8, signal=0.5):
    rng = random.Random(seed)
    classes = sorted(CLASS_WORDS)
    posts = []
    for i in range(n):
        c = classes[i % len(classes)] if i < len(classes) else rng.choice(classes)
        words = [rng.choice(CLASS_WORDS[c]) if rng.random() < signal else rng.choice(FILLER)
                 for _ in range(length)]
        posts.append(Post(str(i + 1), " ".join(words), TAMIL.labels[c]))
    return posts


@pytest.fixture
def toy_dataset():
    return Dataset(TAMIL, tuple(synthetic_posts(200)), "toy")


def write_lines(path, lines):
    Path(path).write_text("".join(l + "\n" for l in lines), encoding="utf-8")
    return path


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
