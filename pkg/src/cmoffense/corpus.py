"""Labels, label schemes and datasets.

Datasets are read from and written to UTF-8 TSV files, either
``text<TAB>label`` or ``id<TAB>text<TAB>label``.  Label cells are matched
case-insensitively against a per-scheme alias table, so the surface forms
used by the different shared-task releases (``Not_offensive``,
``not-Tamil``, ``Offensive_Untargetede`` ...) all parse.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class CorpusError(ValueError):
    """Base class for dataset problems."""


class ParseError(CorpusError):
    pass


class LabelError(CorpusError):
    pass


class MappingError(CorpusError):
    pass


class Label(enum.Enum):
    NOT_OFFENSIVE = "NOT_OFFENSIVE"
    OFFENSIVE_UNTARGETED = "OFFENSIVE_UNTARGETED"
    OFFENSIVE_TARGETED_INDIVIDUAL = "OFFENSIVE_TARGETED_INDIVIDUAL"
    OFFENSIVE_TARGETED_GROUP = "OFFENSIVE_TARGETED_GROUP"
    OFFENSIVE_TARGETED_OTHER = "OFFENSIVE_TARGETED_OTHER"
    NOT_IN_LANGUAGE = "NOT_IN_LANGUAGE"

    def render(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "Label":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise LabelError(f"unknown label {text!r}") from None

    def __str__(self) -> str:
        return self.value


ALL_LABELS: tuple[Label, ...] = tuple(Label)

# surface forms shared by every scheme; keys are lowercase
_COMMON_ALIASES: dict[str, Label] = {
    "not_offensive": Label.NOT_OFFENSIVE,
    "not offensive": Label.NOT_OFFENSIVE,
    "offensive_untargetede": Label.OFFENSIVE_UNTARGETED,
    "offensive_untargeted": Label.OFFENSIVE_UNTARGETED,
    "offensive_targeted_insult_individual": Label.OFFENSIVE_TARGETED_INDIVIDUAL,
    "offensive_targeted_insult_group": Label.OFFENSIVE_TARGETED_GROUP,
    "offensive_targeted_insult_other": Label.OFFENSIVE_TARGETED_OTHER,
}
for _label in Label:
    _COMMON_ALIASES[_label.value.lower()] = _label

_NOT_LANGUAGE_ALIASES = {
    "tamil": ("not-tamil", "not_tamil"),
    "malayalam": ("not-malayalam", "not_malayalam"),
    "kannada": ("not-kannada", "not_kannada"),
}


@dataclass(frozen=True)
class LabelScheme:
    name: str
    labels: tuple[Label, ...]
    aliases: Mapping[str, Label] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate labels in scheme {self.name!r}")
        table = {k: v for k, v in _COMMON_ALIASES.items() if v in self.labels}
        table.update({k.lower(): v for k, v in self.aliases.items()})
        object.__setattr__(self, "aliases", table)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: Label) -> bool:
        return label in self.labels

    def index(self, label: Label) -> int:
        return self.labels.index(label)

    def lookup(self, text: str) -> Label | None:
        """Map a surface label string to a Label, or None if unknown."""
        return self.aliases.get(text.strip().lower())


def _scheme(name: str, labels: Iterable[Label], languages: Sequence[str] = ()) -> LabelScheme:
    aliases = {}
    for lang in languages:
        for alias in _NOT_LANGUAGE_ALIASES[lang]:
            aliases[alias] = Label.NOT_IN_LANGUAGE
    return LabelScheme(name, tuple(labels), aliases)


_NO_OTHER = [l for l in ALL_LABELS if l is not Label.OFFENSIVE_TARGETED_OTHER]
_NO_NIL = [l for l in ALL_LABELS if l is not Label.NOT_IN_LANGUAGE]

TAMIL = _scheme("tamil", ALL_LABELS, ["tamil"])
KANNADA = _scheme("kannada", ALL_LABELS, ["kannada"])
MALAYALAM = _scheme("malayalam", _NO_OTHER, ["malayalam"])
FULL = _scheme("full", ALL_LABELS, ["tamil", "malayalam", "kannada"])
COMBINED = _scheme("combined", _NO_NIL)

SCHEMES: dict[str, LabelScheme] = {
    s.name: s for s in (TAMIL, KANNADA, MALAYALAM, FULL, COMBINED)
}
SCHEMES["olid"] = COMBINED


def get_scheme(name: str) -> LabelScheme:
    try:
        return SCHEMES[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown scheme {name!r}; choose from {', '.join(sorted(SCHEMES))}"
        ) from None


def scheme_for_labels(labels: Sequence[Label]) -> LabelScheme:
    """Find a registered scheme with exactly this label order, else build one."""
    labels = tuple(labels)
    for name in ("full", "combined", "malayalam"):
        if SCHEMES[name].labels == labels:
            return SCHEMES[name]
    return LabelScheme("custom", labels)


@dataclass(frozen=True)
class Post:
    id: str
    text: str
    label: Label | None = None

    def __post_init__(self):
        if not self.id:
            raise CorpusError("post id must be nonempty")


@dataclass(frozen=True)
class Dataset:
    scheme: LabelScheme
    posts: tuple[Post, ...]
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "posts", tuple(self.posts))
        seen = set()
        for post in self.posts:
            if post.id in seen:
                raise CorpusError(f"duplicate post id {post.id!r}")
            seen.add(post.id)
            if post.label is not None and post.label not in self.scheme:
                raise LabelError(
                    f"post {post.id!r}: label {post.label} not in scheme {self.scheme.name!r}"
                )

    def __len__(self) -> int:
        return len(self.posts)

    def __iter__(self):
        return iter(self.posts)

    @property
    def texts(self) -> list[str]:
        return [p.text for p in self.posts]

    @property
    def labels(self) -> list[Label | None]:
        return [p.label for p in self.posts]

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.posts]


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if len(self.ratios) != 3 or any(r < 0 for r in self.ratios):
            raise ValueError("ratios must be three non-negative numbers")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"ratios must sum to 1, got {sum(self.ratios)!r}")


# -- file IO ----------------------------------------------------------------

_HEADER_WORDS = {"label", "labels", "category", "class", "tag", "target"}
FORMATS = ("auto", "text_label", "id_text_label")


def _read_lines(path: Path) -> list[str]:
    with open(path, encoding="utf-8", newline="") as f:
        data = f.read()
    lines = data.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def load_dataset(path, scheme: LabelScheme, format: str = "auto", provenance: str | None = None) -> Dataset:
    """Read a labelled TSV file.

    ``format`` is ``text_label``, ``id_text_label`` or ``auto`` (decided per
    row by column count).  A first row whose label cell is a header word
    such as ``label`` or ``category`` is skipped.  An empty label cell
    leaves the post unlabelled.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}")
    path = Path(path)
    lines = _read_lines(path)
    posts = []
    bad_labels = []
    for lineno, line in enumerate(lines, start=1):
        cells = line.split("\t")
        ncols = len(cells)
        if format == "text_label" and ncols != 2 or format == "id_text_label" and ncols != 3 \
                or format == "auto" and ncols not in (2, 3):
            raise ParseError(f"{path}:{lineno}: expected {_expected(format)} columns, got {ncols}")
        if ncols == 2:
            post_id, text, raw_label = str(len(posts) + 1), cells[0], cells[1]
        else:
            post_id, text, raw_label = cells
        if lineno == 1 and raw_label.strip().lower() in _HEADER_WORDS:
            continue
        if raw_label.strip() == "":
            label = None
        else:
            label = scheme.lookup(raw_label)
            if label is None:
                bad_labels.append((lineno, raw_label))
                continue
        posts.append(Post(post_id, text, label))
    if bad_labels:
        listing = ", ".join(f"line {n}: {lab!r}" for n, lab in bad_labels[:20])
        more = f" (+{len(bad_labels) - 20} more)" if len(bad_labels) > 20 else ""
        raise LabelError(f"{path}: labels not in scheme {scheme.name!r}: {listing}{more}")
    return Dataset(scheme, tuple(posts), provenance if provenance is not None else path.stem)


def _expected(format):
    return {"text_label": "2", "id_text_label": "3", "auto": "2 or 3"}[format]


def save_dataset(ds: Dataset, path) -> None:
    """Write ``id<TAB>text<TAB>label`` rows (empty label cell when unlabelled)."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        for post in ds.posts:
            for what, value in (("id", post.id), ("text", post.text)):
                if "\t" in value or "\n" in value or "\r" in value:
                    raise CorpusError(f"post {post.id!r}: {what} contains a tab or newline")
            label = post.label.render() if post.label is not None else ""
            f.write(f"{post.id}\t{post.text}\t{label}\n")


def load_olid(path) -> Dataset:
    """Read the OLID TSV (``id, tweet, subtask_a, subtask_b, subtask_c``)."""
    path = Path(path)
    posts = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        cells = line.split("\t")
        if lineno == 1 and cells and cells[0].strip().lower() == "id":
            continue
        if len(cells) != 5:
            raise ParseError(f"{path}:{lineno}: expected 5 columns, got {len(cells)}")
        post_id, tweet, a, b, c = cells
        try:
            label = map_olid(a, b, c)
        except MappingError as e:
            raise MappingError(f"{path}:{lineno}: {e}") from None
        posts.append(Post(post_id, tweet, label))
    return Dataset(COMBINED, tuple(posts), "olid")


# -- transformations --------------------------------------------------------

def _allocate(n: int, ratios: Sequence[float]) -> list[int]:
    """Largest-remainder rounding of n*ratios (ties go to the earlier part)."""
    ideal = [n * r for r in ratios]
    sizes = [int(x) for x in ideal]
    order = sorted(range(len(ratios)), key=lambda i: (-(ideal[i] - sizes[i]), i))
    for i in order[: n - sum(sizes)]:
        sizes[i] += 1
    return sizes


def _stratified_counts(class_sizes: Sequence[int], ratios: Sequence[float]) -> list[list[int]]:
    """Per-class part sizes: each within 1 of its ideal share, part totals exact.

    Starts from the floors and hands out each class's leftover posts to the
    parts with the most unfilled room (ties: larger fractional share, then
    earlier part).  Classes with more leftovers are served first, which is
    the Gale-Ryser greedy order, so the totals are always met.
    """
    totals = _allocate(sum(class_sizes), ratios)
    counts = [[int(n * r) for r in ratios] for n in class_sizes]
    room = [totals[p] - sum(row[p] for row in counts) for p in range(len(ratios))]
    leftover = [n - sum(row) for n, row in zip(class_sizes, counts)]
    for c in sorted(range(len(class_sizes)), key=lambda c: (-leftover[c], c)):
        n = class_sizes[c]
        parts = sorted(
            range(len(ratios)),
            key=lambda p: (-room[p], -(n * ratios[p] - counts[c][p]), p),
        )
        for p in parts[: leftover[c]]:
            counts[c][p] += 1
            room[p] -= 1
    return counts


def split(ds: Dataset, spec: SplitSpec = SplitSpec()) -> tuple[Dataset, Dataset, Dataset]:
    """Partition ``ds`` into train/validation/test; deterministic given the seed.

    Posts keep their original relative order inside each part.
    """
    rng = random.Random(spec.seed)
    parts: list[list[int]] = [[], [], []]
    if spec.stratified:
        by_class: dict[Label, list[int]] = {label: [] for label in ds.scheme.labels}
        for i, post in enumerate(ds.posts):
            if post.label is None:
                raise CorpusError(f"stratified split needs labels; post {post.id!r} is unlabelled")
            by_class[post.label].append(i)
        groups = [by_class[label] for label in ds.scheme.labels]
        counts = _stratified_counts([len(g) for g in groups], spec.ratios)
        for group, row in zip(groups, counts):
            rng.shuffle(group)
            start = 0
            for p, k in enumerate(row):
                parts[p].extend(group[start:start + k])
                start += k
    else:
        order = list(range(len(ds)))
        rng.shuffle(order)
        start = 0
        for p, k in enumerate(_allocate(len(ds), spec.ratios)):
            parts[p] = order[start:start + k]
            start += k
    names = ("train", "valid", "test")
    return tuple(
        Dataset(ds.scheme, tuple(ds.posts[i] for i in sorted(idx)), f"{ds.provenance}:{name}")
        for idx, name in zip(parts, names)
    )


def _olid_cell(value: str | None) -> str | None:
    if value is None:
        return None
    value = value.strip().upper()
    return None if value in ("", "NULL", "-", "NONE") else value


def map_olid(a: str, b: str | None = None, c: str | None = None) -> Label:
    """Map an OLID (subtask A, B, C) annotation onto the task labels."""
    a, b, c = _olid_cell(a), _olid_cell(b), _olid_cell(c)
    if a == "NOT":
        if b is not None or c is not None:
            raise MappingError(f"NOT must have empty subtask B and C, got ({b}, {c})")
        return Label.NOT_OFFENSIVE
    if a != "OFF":
        raise MappingError(f"subtask A must be OFF or NOT, got {a!r}")
    if b == "UNT":
        if c is not None:
            raise MappingError(f"UNT must have empty subtask C, got {c!r}")
        return Label.OFFENSIVE_UNTARGETED
    if b != "TIN":
        raise MappingError(f"subtask B must be TIN or UNT under OFF, got {b!r}")
    targets = {
        "IND": Label.OFFENSIVE_TARGETED_INDIVIDUAL,
        "GRP": Label.OFFENSIVE_TARGETED_GROUP,
        "OTH": Label.OFFENSIVE_TARGETED_OTHER,
    }
    if c not in targets:
        raise MappingError(f"subtask C must be IND, GRP or OTH under TIN, got {c!r}")
    return targets[c]


def combine_for_transfer(datasets: Sequence[Dataset]) -> Dataset:
    """Concatenate datasets under the combined scheme, dropping NOT_IN_LANGUAGE.

    Ids become ``<provenance>/<id>``; repeated provenance tags get a ``#k``
    suffix so ids stay unique.
    """
    if not datasets:
        raise CorpusError("combine_for_transfer needs at least one dataset")
    posts = []
    used: dict[str, int] = {}
    for ds in datasets:
        tag = ds.provenance or "ds"
        n = used.get(tag, 0)
        used[tag] = n + 1
        if n:
            tag = f"{tag}#{n}"
        for post in ds.posts:
            if post.label is Label.NOT_IN_LANGUAGE:
                continue
            posts.append(Post(f"{tag}/{post.id}", post.text, post.label))
    return Dataset(COMBINED, tuple(posts), "+".join(ds.provenance for ds in datasets))


def relabel_scheme(ds: Dataset, target: LabelScheme,
                   rules: Mapping[Label, Label | None] | None = None) -> Dataset:
    """Move ``ds`` to ``target``.

    ``rules`` maps a label to its replacement, or to None to drop posts
    carrying it.  Labels already in ``target`` pass through unless a rule
    names them.
    """
    rules = dict(rules or {})
    posts = []
    for post in ds.posts:
        label = post.label
        if label is not None and label in rules:
            label = rules[label]
            if label is None:
                continue
        if label is not None and label not in target:
            raise LabelError(
                f"post {post.id!r}: label {label} not in scheme {target.name!r} and no rule covers it"
            )
        posts.append(Post(post.id, post.text, label) if label is not post.label else post)
    return Dataset(target, tuple(posts), ds.provenance)


DROP_NOT_IN_LANGUAGE = {Label.NOT_IN_LANGUAGE: None}
