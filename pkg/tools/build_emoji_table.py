"""Regenerate src/cmoffense/data/emoji_descriptions.tsv from the `emoji` package.

The package's English names are CLDR short names with spaces turned into
underscores.  They are flattened here to lowercase ASCII letters and single
spaces so that descriptions survive the rest of the preprocessing chain.

    pip install emoji && python tools/build_emoji_table.py
"""

import re
import sys
import unicodedata
from pathlib import Path

import emoji

OUT = Path(__file__).resolve().parents[1] / "src" / "cmoffense" / "data" / "emoji_descriptions.tsv"

DIGITS = "zero one two three four five six seven eight nine".split()
SYMBOLS = {"#": " number sign ", "*": " asterisk ", "&": " and "}


def flatten(name: str) -> str:
    name = name.strip(":").replace("_", " ")
    name = unicodedata.normalize("NFKD", name)
    out = []
    for ch in name:
        if unicodedata.combining(ch):
            continue
        if ch.isdigit():
            out.append(f" {DIGITS[int(ch)]} ")
        elif ch in SYMBOLS:
            out.append(SYMBOLS[ch])
        elif ch.isascii() and ch.isalpha():
            out.append(ch.lower())
        elif ch in "-:":
            out.append(" ")
        elif ch in "’'.":
            continue
        else:
            out.append(" ")
    return re.sub(r" +", " ", "".join(out)).strip()


def main():
    rows = {}
    for key, data in emoji.EMOJI_DATA.items():
        desc = flatten(data["en"])
        assert desc and re.fullmatch(r"[a-z ]+", desc), (key, desc)
        rows[key] = desc
    with open(OUT, "w", encoding="utf-8", newline="") as f:
        f.write(f"# generated by tools/build_emoji_table.py from emoji {emoji.__version__}\n")
        for key in sorted(rows):
            f.write(f"{key}\t{rows[key]}\n")
    print(f"wrote {len(rows)} entries to {OUT}", file=sys.stderr)


if __name__ == "__main__":
    main()
