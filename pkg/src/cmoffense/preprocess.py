"""Text normalization for code-mixed social media comments.

Two regimes are covered by presets:

* ``CLASSICAL`` - lowercase, drop mentions, punctuation, stopwords and
  emoji, stem English words (the bag-of-words models).
* ``TRANSFORMER`` - replace emoji by their English description and touch
  nothing else.

Steps always run in this order: mentions, emoji, lowercasing, punctuation,
whitespace tokenization, stopwords, stemming, re-join.  Every removal
leaves a space behind, which is what keeps ``normalize`` idempotent.
"""

from __future__ import annotations

import enum
import functools
import unicodedata
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Iterator, Mapping

from .stem import stem_token

MAX_STEM_PASSES = 16


class EmojiMode(enum.Enum):
    KEEP = "keep"
    REMOVE = "remove"
    DESCRIBE = "describe"


@dataclass(frozen=True)
class PreprocessConfig:
    lowercase: bool = False
    strip_punctuation: bool = False
    strip_mentions: bool = False
    stopword_removal: bool = False
    emoji_mode: EmojiMode = EmojiMode.KEEP
    stem_english: bool = False

    def __post_init__(self):
        if isinstance(self.emoji_mode, str):
            object.__setattr__(self, "emoji_mode", EmojiMode(self.emoji_mode.lower()))

    @property
    def is_identity(self) -> bool:
        return self == PreprocessConfig()

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["emoji_mode"] = self.emoji_mode.value
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> "PreprocessConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown preprocess keys: {sorted(unknown)}")
        return cls(**d)


CLASSICAL = PreprocessConfig(
    lowercase=True,
    strip_punctuation=True,
    strip_mentions=True,
    stopword_removal=True,
    emoji_mode=EmojiMode.REMOVE,
    stem_english=True,
)
TRANSFORMER = PreprocessConfig(emoji_mode=EmojiMode.DESCRIBE)
NONE = PreprocessConfig()

PRESETS = {"classical": CLASSICAL, "transformer": TRANSFORMER, "none": NONE}


# -- emoji ------------------------------------------------------------------

# ranges treated as emoji even when the description table has no entry
_PICTOGRAPHIC = ((0x1F000, 0x1FAFF), (0x2600, 0x27BF))
_ZWJ = "‍"


def _is_pictographic(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _PICTOGRAPHIC)


def _is_continuation(ch: str) -> bool:
    cp = ord(ch)
    return (
        cp in (0xFE0E, 0xFE0F, 0x20E3)
        or 0x1F3FB <= cp <= 0x1F3FF
        or 0xE0020 <= cp <= 0xE007F
    )


class EmojiTable:
    """Emoji sequence -> lowercase English description, with a scanner."""

    def __init__(self, mapping: Mapping[str, str]):
        self._map = {}
        for key, desc in mapping.items():
            if not key or any(c.isspace() for c in key):
                raise ValueError(f"invalid emoji key {key!r}")
            if not desc or any(not (c == " " or c.isascii() and c.isalpha()) for c in desc):
                raise ValueError(f"description for {key!r} must be ASCII letters and spaces: {desc!r}")
            self._map[key] = " ".join(desc.lower().split())
        self._lengths: dict[str, list[int]] = {}
        for key in self._map:
            self._lengths.setdefault(key[0], []).append(len(key))
        for first, lengths in self._lengths.items():
            self._lengths[first] = sorted(set(lengths), reverse=True)

    def __len__(self):
        return len(self._map)

    def __contains__(self, key):
        return key in self._map

    def get(self, key: str) -> str | None:
        return self._map.get(key)

    @classmethod
    def from_tsv(cls, path) -> "EmojiTable":
        with open(path, encoding="utf-8") as f:
            return cls(_parse_table(f, str(path)))

    def _element(self, text: str, i: int) -> int:
        """End of the emoji element starting at i, or i if none starts there."""
        for n in self._lengths.get(text[i], ()):
            if i + n <= len(text) and text[i:i + n] in self._map:
                return i + n
        if _is_pictographic(text[i]):
            return i + 1
        return i

    def match(self, text: str, i: int) -> int:
        """End of the emoji sequence (elements joined by ZWJ) starting at i."""
        end = self._element(text, i)
        if end == i:
            return i
        while True:
            while end < len(text) and _is_continuation(text[end]):
                end += 1
            if end + 1 < len(text) and text[end] == _ZWJ:
                nxt = self._element(text, end + 1)
                if nxt > end + 1:
                    end = nxt
                    continue
            return end

    def spans(self, text: str) -> Iterator[tuple[int, int, bool]]:
        """Yield (start, end, is_emoji) pieces covering ``text``."""
        i = start = 0
        n = len(text)
        while i < n:
            end = self.match(text, i)
            if end > i:
                if start < i:
                    yield start, i, False
                yield i, end, True
                i = start = end
            else:
                i += 1
        if start < n:
            yield start, n, False

    def describe_sequence(self, seq: str) -> str:
        """Description of one matched sequence; '' when nothing is known."""
        if seq in self._map:
            return self._map[seq]
        words = []
        i = 0
        while i < len(seq):
            for n in self._lengths.get(seq[i], ()):
                if i + n <= len(seq) and seq[i:i + n] in self._map:
                    words.append(self._map[seq[i:i + n]])
                    i += n
                    break
            else:
                i += 1
        return " ".join(words)


def _parse_table(lines, source: str) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if "\t" not in line:
            if line.strip() and not line.startswith("#"):
                raise ValueError(f"{source}:{lineno}: expected key<TAB>value")
            continue
        key, value = line.split("\t", 1)
        out[key] = value
    return out


@functools.lru_cache(maxsize=None)
def default_emoji_table() -> EmojiTable:
    data = resources.files("cmoffense").joinpath("data/emoji_descriptions.tsv")
    with data.open(encoding="utf-8") as f:
        return EmojiTable(_parse_table(f, "emoji_descriptions.tsv"))


def describe_emoji(grapheme: str, table: EmojiTable | None = None) -> str | None:
    """Describe an emoji (or a run of them); None if anything in it is not a known emoji."""
    table = table or default_emoji_table()
    words = []
    for start, end, is_emoji in table.spans(grapheme):
        if not is_emoji:
            return None
        desc = table.describe_sequence(grapheme[start:end])
        if not desc:
            return None
        words.append(desc)
    return " ".join(words) if words else None


# -- stopwords --------------------------------------------------------------

class StopwordList(frozenset):
    def __new__(cls, words=()):
        words = frozenset(words)
        if not words:
            raise ValueError("stopword list is empty")
        bad = [w for w in words if w != w.lower()]
        if bad:
            raise ValueError(f"stopwords must be lowercase: {sorted(bad)[:5]}")
        return super().__new__(cls, words)

    @classmethod
    def from_file(cls, path) -> "StopwordList":
        with open(path, encoding="utf-8") as f:
            return cls(line.strip() for line in f if line.strip() and not line.startswith("#"))


@functools.lru_cache(maxsize=None)
def default_stopwords() -> StopwordList:
    data = resources.files("cmoffense").joinpath("data/stopwords_en.txt")
    with data.open(encoding="utf-8") as f:
        return StopwordList(line.strip() for line in f if line.strip())


# -- normalization ----------------------------------------------------------

def _is_mention_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_" or unicodedata.category(ch)[0] == "M"


def strip_mentions(text: str) -> str:
    """Replace ``@handle`` runs by a space."""
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "@" and i + 1 < n and (text[i + 1].isalnum() or text[i + 1] == "_"):
            j = i + 1
            while j < n and _is_mention_char(text[j]):
                j += 1
            out.append(" ")
            i = j
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _handle_emoji(text: str, mode: EmojiMode, table: EmojiTable) -> str:
    if mode is EmojiMode.KEEP:
        return text
    out = []
    for start, end, is_emoji in table.spans(text):
        if not is_emoji:
            out.append(text[start:end])
        elif mode is EmojiMode.DESCRIBE:
            out.append(f" {table.describe_sequence(text[start:end])} ")
        else:
            out.append(" ")
    return "".join(out)


def is_punctuation(ch: str) -> bool:
    return unicodedata.category(ch)[0] in "PS"


def strip_punctuation(text: str, table: EmojiTable | None = None) -> str:
    """Replace P*/S* characters by spaces, leaving emoji sequences intact."""
    table = table or default_emoji_table()
    out = []
    for start, end, is_emoji in table.spans(text):
        chunk = text[start:end]
        if is_emoji:
            out.append(chunk)
        else:
            out.append("".join(" " if is_punctuation(c) else c for c in chunk))
    return "".join(out)


def _stem_fixed(token: str) -> str:
    for _ in range(MAX_STEM_PASSES):
        stemmed = stem_token(token)
        if stemmed == token:
            break
        token = stemmed
    return token


def normalize(
    text: str,
    config: PreprocessConfig = CLASSICAL,
    emoji_table: EmojiTable | None = None,
    stopwords: StopwordList | None = None,
) -> str:
    if config.is_identity:
        return text
    table = emoji_table or default_emoji_table()
    if config.strip_mentions:
        text = strip_mentions(text)
    text = _handle_emoji(text, config.emoji_mode, table)
    if config.lowercase:
        text = text.lower()
    if config.strip_punctuation:
        text = strip_punctuation(text, table)
    tokens = text.split()
    if config.stopword_removal:
        sw = stopwords if stopwords is not None else default_stopwords()
        tokens = [t for t in tokens if t not in sw]
    if config.stem_english:
        stemmed = []
        for tok in tokens:
            s = _stem_fixed(tok)
            # a stem that collides with a stopword would vanish on a second pass
            if config.stopword_removal and s in sw:
                s = tok
            stemmed.append(s)
        tokens = stemmed
    return " ".join(tokens)


def normalize_all(texts, config: PreprocessConfig = CLASSICAL, **kwargs) -> list[str]:
    return [normalize(t, config, **kwargs) for t in texts]


def with_overrides(config: PreprocessConfig, **changes) -> PreprocessConfig:
    return replace(config, **changes)


def load_emoji_table(path: str | Path | None) -> EmojiTable:
    return EmojiTable.from_tsv(path) if path else default_emoji_table()


def load_stopwords(path: str | Path | None) -> StopwordList:
    return StopwordList.from_file(path) if path else default_stopwords()
