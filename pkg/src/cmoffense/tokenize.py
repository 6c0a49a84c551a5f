"""Word tokenization and a unigram language-model subword tokenizer.

The subword model assigns every piece an independent probability and
segments a word into the piece sequence of maximum total log-probability.
Training starts from a large seed vocabulary of frequent substrings and
alternates EM re-estimation (forward-backward over each word's lattice)
with pruning of the pieces whose removal costs the least likelihood.
Segmentation never crosses whitespace.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Iterable, Sequence

log = logging.getLogger(__name__)

FORMAT_TAG = "#cmoffense-unigram v1"
UNK_PENALTY = 10.0
NEG_INF = float("-inf")


class TokenizerError(ValueError):
    pass


class CoverageError(TokenizerError):
    def __init__(self, char: str, text: str):
        super().__init__(f"character {char!r} (U+{ord(char):04X}) in {text!r} is not covered by the model")
        self.char = char


def word_tokenize(text: str) -> list[str]:
    return text.split()


def _logsumexp(values):
    m = max(values)
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(sum(math.exp(v - m) for v in values))


@dataclass(frozen=True)
class TokenizerTrainConfig:
    target_vocab: int = 8000
    seed_max_piece_len: int = 8
    seed_max_vocab: int | None = None  # default 20 * target_vocab
    em_iterations_per_round: int = 2
    prune_keep_fraction: float = 0.75
    min_piece_count: int = 2

    def __post_init__(self):
        for name in ("target_vocab", "seed_max_piece_len", "em_iterations_per_round", "min_piece_count"):
            if getattr(self, name) < 1:
                raise TokenizerError(f"{name} must be a positive integer")
        if self.seed_max_vocab is not None and self.seed_max_vocab < 1:
            raise TokenizerError("seed_max_vocab must be a positive integer")
        if not 0 < self.prune_keep_fraction < 1:
            raise TokenizerError("prune_keep_fraction must lie in (0, 1)")

    @property
    def seed_vocab_limit(self) -> int:
        return self.seed_max_vocab if self.seed_max_vocab is not None else 20 * self.target_vocab

    def to_dict(self):
        return asdict(self)


class UnigramModel:
    """Piece -> natural-log probability, plus Viterbi segmentation."""

    def __init__(self, pieces: dict[str, float], version: str = FORMAT_TAG):
        if not pieces:
            raise TokenizerError("a unigram model needs at least one piece")
        for piece, lp in pieces.items():
            if not piece or any(c.isspace() for c in piece):
                raise TokenizerError(f"invalid piece {piece!r}")
            if not lp <= 0.0:
                raise TokenizerError(f"piece {piece!r} has log-probability {lp!r} > 0")
        self.pieces = dict(pieces)
        self.version = version
        self.max_len = max(len(p) for p in self.pieces)
        self.unk_logp = min(self.pieces.values()) - UNK_PENALTY
        self._sorted = sorted(self.pieces)
        self._ids = {p: i for i, p in enumerate(self._sorted)}

    def __len__(self):
        return len(self.pieces)

    def __contains__(self, piece):
        return piece in self.pieces

    def __eq__(self, other):
        return isinstance(other, UnigramModel) and self.pieces == other.pieces

    @property
    def unk_id(self) -> int:
        return len(self._sorted)

    def piece_id(self, piece: str) -> int:
        return self._ids.get(piece, self.unk_id)

    def id_to_piece(self, i: int) -> str:
        return self._sorted[i] if i < len(self._sorted) else "�"

    def segment_word(self, word: str, allow_unk: bool = True) -> list[str]:
        n = len(word)
        if n == 0:
            return []
        pieces = self.pieces
        # best[i]: (score, piece count) of the best segmentation of word[i:]
        best: list[tuple[float, int]] = [(NEG_INF, 0)] * n + [(0.0, 0)]
        step = [0] * n
        for i in range(n - 1, -1, -1):
            b_score, b_n, b_len = NEG_INF, 0, 0
            for length in range(min(self.max_len, n - i), 0, -1):
                lp = pieces.get(word[i:i + length])
                if lp is None:
                    if length == 1 and allow_unk:
                        lp = self.unk_logp
                    else:
                        continue
                rest_score, rest_n = best[i + length]
                if rest_score == NEG_INF:
                    continue
                score = lp + rest_score
                # longest first, so equal (score, count) keeps the longer piece
                if score > b_score or score == b_score and rest_n + 1 < b_n:
                    b_score, b_n, b_len = score, rest_n + 1, length
            if b_len == 0:
                raise CoverageError(word[i], word)
            best[i] = (b_score, b_n)
            step[i] = b_len
        out = []
        i = 0
        while i < n:
            out.append(word[i:i + step[i]])
            i += step[i]
        return out

    def segment(self, text: str, allow_unk: bool = True) -> list[str]:
        out = []
        for word in text.split():
            out.extend(self.segment_word(word, allow_unk))
        return out

    def score(self, pieces: Sequence[str]) -> float:
        return sum(self.pieces.get(p, self.unk_logp) for p in pieces)

    def encode(self, text: str, allow_unk: bool = True) -> list[int]:
        return [self.piece_id(p) for p in self.segment(text, allow_unk)]

    def decode(self, ids: Iterable[int]) -> str:
        """Concatenate pieces.  Whitespace is not encoded, so it does not come back."""
        return "".join(self.id_to_piece(i) for i in ids)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(FORMAT_TAG + "\n")
            for piece in self._sorted:
                f.write(f"{piece}\t{self.pieces[piece]:.17g}\n")

    @classmethod
    def load(cls, path) -> "UnigramModel":
        with open(path, encoding="utf-8", newline="") as f:
            lines = f.read().split("\n")
        if not lines or lines[0] != FORMAT_TAG:
            raise TokenizerError(f"{path}: not a unigram model file (expected {FORMAT_TAG!r})")
        pieces = {}
        for lineno, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise TokenizerError(f"{path}:{lineno}: expected piece<TAB>log-probability")
            try:
                pieces[parts[0]] = float(parts[1])
            except ValueError:
                raise TokenizerError(f"{path}:{lineno}: bad log-probability {parts[1]!r}") from None
        return cls(pieces)


def segment(model: UnigramModel, text: str, allow_unk: bool = True) -> list[str]:
    return model.segment(text, allow_unk)


def encode(model: UnigramModel, text: str, allow_unk: bool = True) -> list[int]:
    return model.encode(text, allow_unk)


def decode(model: UnigramModel, ids: Iterable[int]) -> str:
    return model.decode(ids)


# -- training -----------------------------------------------------------------

def _lattice(word: str, logp: dict[str, float], max_len: int):
    """Edges (start, end, piece) of every piece matching inside ``word``."""
    n = len(word)
    edges = []
    for i in range(n):
        for j in range(i + 1, min(n, i + max_len) + 1):
            piece = word[i:j]
            if piece in logp:
                edges.append((i, j, piece))
    return edges


def forward_backward(word: str, logp: dict[str, float], max_len: int):
    """Return (log Z, {piece: expected count}) for one word."""
    n = len(word)
    edges = _lattice(word, logp, max_len)
    incoming: list[list] = [[] for _ in range(n + 1)]
    outgoing: list[list] = [[] for _ in range(n + 1)]
    for e in edges:
        incoming[e[1]].append(e)
        outgoing[e[0]].append(e)
    alpha = [NEG_INF] * (n + 1)
    alpha[0] = 0.0
    for j in range(1, n + 1):
        terms = [alpha[i] + logp[p] for i, _, p in incoming[j]]
        if terms:
            alpha[j] = _logsumexp(terms)
    beta = [NEG_INF] * (n + 1)
    beta[n] = 0.0
    for i in range(n - 1, -1, -1):
        terms = [logp[p] + beta[j] for _, j, p in outgoing[i]]
        if terms:
            beta[i] = _logsumexp(terms)
    z = alpha[n]
    if z == NEG_INF:
        raise CoverageError(next(c for c in word if c not in logp), word)
    counts: dict[str, float] = {}
    for i, j, p in edges:
        post = math.exp(alpha[i] + logp[p] + beta[j] - z)
        if post > 0.0:
            counts[p] = counts.get(p, 0.0) + post
    return z, counts


def e_step(words: dict[str, int], logp: dict[str, float]):
    """Expected piece counts over a weighted word list; returns (counts, corpus log-likelihood)."""
    max_len = max(len(p) for p in logp)
    total: dict[str, float] = {}
    ll = 0.0
    for word, freq in words.items():
        z, counts = forward_backward(word, logp, max_len)
        ll += freq * z
        for p, c in counts.items():
            total[p] = total.get(p, 0.0) + freq * c
    return total, ll


def corpus_log_likelihood(words: dict[str, int], logp: dict[str, float]) -> float:
    max_len = max(len(p) for p in logp)
    return sum(freq * forward_backward(w, logp, max_len)[0] for w, freq in words.items())


def m_step(counts: dict[str, float], logp: dict[str, float]) -> dict[str, float]:
    """Maximum-likelihood re-estimate; multi-character pieces with no mass are dropped."""
    kept = {p: counts.get(p, 0.0) for p in logp}
    kept = {p: c for p, c in kept.items() if c > 0.0 or len(p) == 1}
    total = sum(kept.values())
    floor = total * 1e-300
    return {p: math.log(max(c, floor) / total) for p, c in kept.items()}


def _alternative_score(piece: str, logp: dict[str, float], max_len: int) -> float:
    """Best log-probability of ``piece`` segmented into at least two pieces."""
    n = len(piece)
    best = [NEG_INF] * (n + 1)
    best[0] = 0.0
    for j in range(1, n + 1):
        for i in range(max(0, j - max_len), j):
            if i == 0 and j == n:
                continue
            lp = logp.get(piece[i:j])
            if lp is not None and best[i] != NEG_INF:
                best[j] = max(best[j], best[i] + lp)
    return best[n]


def prune(logp: dict[str, float], counts: dict[str, float], keep: int) -> dict[str, float]:
    """Keep ``keep`` pieces: all single characters plus the multi-character
    pieces whose removal would lose the most likelihood.

    The loss of a piece is approximated by its expected count times the
    log-probability gap to its best alternative segmentation.
    """
    max_len = max(len(p) for p in logp)
    chars = [p for p in logp if len(p) == 1]
    scored = []
    for p in logp:
        if len(p) == 1:
            continue
        alt = _alternative_score(p, logp, max_len)
        loss = counts.get(p, 0.0) * (logp[p] - alt)
        scored.append((-loss, p))
    scored.sort()
    room = max(0, keep - len(chars))
    kept = chars + [p for _, p in scored[:room]]
    return {p: logp[p] for p in kept}


def _normalized(logp: dict[str, float]) -> dict[str, float]:
    z = _logsumexp(list(logp.values()))
    return {p: min(0.0, lp - z) for p, lp in logp.items()}


def seed_pieces(words: dict[str, int], config: TokenizerTrainConfig) -> dict[str, float]:
    """Frequent substrings scored by frequency x length, plus every character."""
    chars: Counter = Counter()
    subs: Counter = Counter()
    max_len = config.seed_max_piece_len
    for word, freq in words.items():
        n = len(word)
        for i in range(n):
            chars[word[i]] += freq
            for j in range(i + 2, min(n, i + max_len) + 1):
                subs[word[i:j]] += freq
    scored = sorted(
        ((c * len(s), s) for s, c in subs.items() if c >= config.min_piece_count),
        key=lambda t: (-t[0], t[1]),
    )
    room = max(0, config.seed_vocab_limit - len(chars))
    scores = {s: float(score) for score, s in scored[:room]}
    scores.update({c: float(n) for c, n in chars.items()})
    total = sum(scores.values())
    return {p: math.log(s / total) for p, s in scores.items()}


def train_unigram(
    corpus: Sequence[str],
    config: TokenizerTrainConfig = TokenizerTrainConfig(),
    trace: list | None = None,
) -> UnigramModel:
    """Train a unigram model on ``corpus`` (one string per sentence).

    If ``trace`` is a list, one ``(round, iteration, ll_before, ll_after)``
    tuple is appended per EM iteration.
    """
    if not corpus:
        raise TokenizerError("training corpus is empty")
    words = Counter()
    for sentence in corpus:
        words.update(sentence.split())
    if not words:
        raise TokenizerError("training corpus contains no tokens")
    alphabet = {c for w in words for c in w}
    if config.target_vocab < len(alphabet):
        raise TokenizerError(
            f"target_vocab {config.target_vocab} is smaller than the alphabet ({len(alphabet)} characters)"
        )
    words = dict(words)
    logp = seed_pieces(words, config)
    log.info("seed vocabulary: %d pieces, %d characters", len(logp), len(alphabet))

    def run_em(logp, round_no, counts=None, ll=None):
        for it in range(config.em_iterations_per_round):
            if counts is None:
                counts, ll = e_step(words, logp)
            logp = m_step(counts, logp)
            counts, ll_after = e_step(words, logp)
            if trace is not None:
                trace.append((round_no, it, ll, ll_after))
            ll = ll_after
        return logp, counts, ll

    round_no = 0
    counts = ll = None
    while len(logp) > config.target_vocab:
        logp, counts, ll = run_em(logp, round_no, counts, ll)
        size = len(logp)
        keep = max(config.target_vocab, min(size - 1, int(size * config.prune_keep_fraction)))
        logp = prune(logp, counts, keep)
        log.info("round %d: ll=%.4f, pruned %d -> %d pieces", round_no, ll, size, len(logp))
        counts = ll = None
        round_no += 1
    logp, counts, ll = run_em(logp, round_no)
    return UnigramModel(_normalized(logp))


def load_model(path: str | Path) -> UnigramModel:
    return UnigramModel.load(path)
