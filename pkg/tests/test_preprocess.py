import unicodedata
from itertools import product

import pytest
from hypothesis import example, given, settings, strategies as st

from cmoffense.preprocess import (
    CLASSICAL, NONE, TRANSFORMER, EmojiMode, EmojiTable, PreprocessConfig, StopwordList,
    default_emoji_table, default_stopwords, describe_emoji, is_punctuation, normalize,
    strip_mentions,
)
from cmoffense.stem import porter_stem, stem_token
from conftest import DATA

ALL_ON_REMOVE = PreprocessConfig(True, True, True, True, EmojiMode.REMOVE, True)

ALL_CONFIGS = [
    PreprocessConfig(*flags[:4], mode, flags[4])
    for flags in product([False, True], repeat=5)
    for mode in EmojiMode
]


def test_hello_world():
    assert normalize("Hello, WORLD!!", ALL_ON_REMOVE) == "hello world"


def test_describe_mode():
    assert normalize("nice 😀", PreprocessConfig(emoji_mode=EmojiMode.DESCRIBE)) == "nice grinning face"


def test_mentions():
    assert normalize("@user enna da", PreprocessConfig(strip_mentions=True)) == "enna da"
    assert strip_mentions("mail a@b.com @_x y") == "mail a .com   y"


def test_identity_config():
    text = "  Weird\tTEXT, 😀 @user!! "
    assert normalize(text, NONE) == text
    assert NONE.is_identity and not CLASSICAL.is_identity


def test_presets():
    assert TRANSFORMER.emoji_mode is EmojiMode.DESCRIBE and not TRANSFORMER.lowercase
    assert CLASSICAL.emoji_mode is EmojiMode.REMOVE and CLASSICAL.stopword_removal


def test_config_dict_round_trip():
    for cfg in ALL_CONFIGS[:10]:
        assert PreprocessConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        PreprocessConfig.from_dict({"lemmatize": True})


def test_emoji_descriptions():
    assert describe_emoji("😀") == "grinning face"
    assert describe_emoji("a") is None
    assert describe_emoji("😀😀") == "grinning face grinning face"
    assert describe_emoji("😀a") is None


def test_emoji_sequences():
    table = default_emoji_table()
    # keycap, skin tone and ZWJ family each match as a single unit
    for seq in ["#️⃣", "👍🏽", "👨‍👩‍👧"]:
        assert list(table.spans(seq)) == [(0, len(seq), True)]
    assert describe_emoji("#️⃣") == "keycap number sign"


def test_emoji_table_descriptions_are_letters_and_spaces():
    with pytest.raises(ValueError):
        EmojiTable({"😀": "grinning-face"})
    table = default_emoji_table()
    assert len(table) > 3000


def test_stopwords():
    sw = default_stopwords()
    assert len(sw) == 179
    assert all(w == w.lower() for w in sw)
    assert {"the", "and", "is", "not"} <= sw
    with pytest.raises(ValueError):
        StopwordList([])
    with pytest.raises(ValueError):
        StopwordList(["The"])


def test_stopword_removal_keeps_other_scripts():
    cfg = PreprocessConfig(stopword_removal=True)
    assert normalize("the படம் is நல்ல", cfg) == "படம் நல்ல"


def test_stemming_examples():
    assert stem_token("running") == "run"
    assert stem_token("caresses") == "caress"
    assert stem_token("படம்") == "படம்"
    assert stem_token("a") == "a"


def test_porter_reference_pairs():
    pairs = [line.split("\t") for line in (DATA / "porter_pairs.tsv").read_text().splitlines() if line]
    assert len(pairs) > 400
    bad = [(w, s, porter_stem(w)) for w, s in pairs if porter_stem(w) != s]
    assert not bad, bad[:10]


def test_stem_never_empty():
    for w in ["s", "ss", "ies", "eed", "ed", "ing", "ational"]:
        assert stem_token(w)


@pytest.mark.parametrize("cfg", ALL_CONFIGS)
def test_idempotent_on_mixed_sample(cfg):
    text = "@Ravi Semma MASS!! 😀😀 thalaivar's running-movies... படம் சூப்பர் 👍🏽 #️⃣ the caresses"
    once = normalize(text, cfg)
    assert normalize(once, cfg) == once


unicode_text = st.lists(
    st.one_of(
        st.characters(blacklist_categories=("Cs",)),
        st.sampled_from(list("😀👍🏽👨👩#@_ .,!?'அஆபடம்") + ["\u200d", "\ufe0f", "\u20e3"]),
        st.sampled_from(["running ", "the ", "caresses ", "@user ", "generously ", "THE "]),
    ),
    max_size=30,
).map("".join)


@settings(max_examples=300, deadline=None)
@given(text=unicode_text, cfg=st.sampled_from(ALL_CONFIGS))
@example(text="a‍😀", cfg=ALL_ON_REMOVE)
def test_normalize_idempotent(text, cfg):
    once = normalize(text, cfg)
    assert normalize(once, cfg) == once


@settings(max_examples=200, deadline=None)
@given(text=unicode_text, cfg=st.sampled_from([c for c in ALL_CONFIGS if c.strip_punctuation]))
def test_no_punctuation_outside_emoji(text, cfg):
    out = normalize(text, cfg)
    table = default_emoji_table()
    for start, end, is_emoji in table.spans(out):
        if not is_emoji:
            assert not any(is_punctuation(c) for c in out[start:end]), out


@settings(max_examples=200, deadline=None)
@given(text=unicode_text)
def test_identity_property(text):
    assert normalize(text, NONE) == text
