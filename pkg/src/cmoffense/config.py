"""Run configuration: INI-style ``key = value`` sections, one per module.

Values are resolved with the precedence command-line flags > config file >
built-in defaults.  Every command writes the resolved configuration next
to its outputs as ``config.resolved.ini``.
"""

from __future__ import annotations

import configparser
import hashlib
import os
from pathlib import Path


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_int(text: str):
    t = text.strip().lower()
    return None if t in ("", "none", "all") else int(t)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple:
    return tuple(_opt_int(x) for x in text.split(",") if x.strip())


def _str(text: str) -> str:
    return text.strip()


# section -> key -> (parser, default text)
SCHEMA: dict[str, dict[str, tuple]] = {
    "run": {
        "seed": (int, "0"),
        "threads": (_opt_int, "none"),
    },
    "data": {
        "scheme": (_str, "tamil"),
        "format": (_str, "auto"),
    },
    "split": {
        "ratios": (_floats, "0.8,0.1,0.1"),
        "stratified": (_bool, "true"),
    },
    "preprocess": {
        "preset": (_str, "classical"),
        "lowercase": (_str, ""),
        "strip_punctuation": (_str, ""),
        "strip_mentions": (_str, ""),
        "stopword_removal": (_str, ""),
        "emoji_mode": (_str, ""),
        "stem_english": (_str, ""),
    },
    "tokenizer": {
        "model": (_str, ""),
        "target_vocab": (int, "8000"),
        "seed_max_piece_len": (int, "8"),
        "em_iterations_per_round": (int, "2"),
        "prune_keep_fraction": (float, "0.75"),
        "min_piece_count": (int, "2"),
    },
    "features": {
        "k": (_opt_int, "all"),
        "k_grid": (_str, "auto"),
    },
    "model": {
        "kind": (_str, "mnb"),
        "alpha": (float, "1.0"),
        "lam": (float, "1e-4"),
        "epochs": (int, "10"),
        "class_weight": (_str, "none"),
        "n_trees": (int, "100"),
        "max_depth": (_opt_int, "none"),
        "features_per_split": (_opt_int, "none"),
        "bootstrap": (_bool, "true"),
    },
    "sweep": {
        "alpha_grid": (_floats, "0.01,0.1,0.5,1.0"),
        "lam_grid": (_floats, "1e-5,1e-4,1e-3"),
        "epochs_grid": (_ints, "10"),
        "n_trees_grid": (_ints, "50,100,200"),
        "max_depth_grid": (_ints, "none"),
    },
}

# flags that may be left unset in the preprocess section (meaning: take the preset's value)
PREPROCESS_FLAGS = ("lowercase", "strip_punctuation", "strip_mentions", "stopword_removal", "stem_english")


class RunConfig:
    """Resolved configuration; values are kept as text and parsed on access."""

    def __init__(self, values: dict[str, dict[str, str]] | None = None):
        self.text = {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
        if values:
            self.update(values, "<values>")

    def update(self, values: dict[str, dict[str, str]], source: str) -> None:
        for section, keys in values.items():
            if section not in SCHEMA:
                raise ConfigError(f"{source}: unknown section [{section}]")
            for key, value in keys.items():
                if key not in SCHEMA[section]:
                    raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
                self.text[section][key] = str(value)
                self.get(section, key, source)  # validate now

    def set(self, dotted: str, value, source: str = "command line") -> None:
        if "." not in dotted:
            raise ConfigError(f"{source}: expected section.key, got {dotted!r}")
        section, key = dotted.split(".", 1)
        self.update({section: {key: value}}, source)

    def get(self, section: str, key: str, source: str = "config"):
        parser, _ = SCHEMA[section][key]
        text = self.text[section][key]
        try:
            return parser(text)
        except ValueError as e:
            raise ConfigError(f"{source}: bad value for {section}.{key}: {e}") from None

    def section(self, section: str) -> dict:
        return {k: self.get(section, k) for k in SCHEMA[section]}

    def write(self, path) -> None:
        parser = configparser.ConfigParser(interpolation=None)
        for section in SCHEMA:
            parser[section] = dict(sorted(self.text[section].items()))
        with open(path, "w", encoding="utf-8", newline="") as f:
            parser.write(f)

    def threads(self) -> int:
        n = self.get("run", "threads")
        return n if n and n > 0 else (os.cpu_count() or 1)


def read_config_file(path) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as f:
            parser.read_file(f)
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror or e}") from None
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from None
    return {s: dict(parser[s]) for s in parser.sections()}


def load_config(path=None, overrides: dict[str, object] | None = None) -> RunConfig:
    """Defaults, then the file at ``path``, then ``overrides`` (dotted keys, None skipped)."""
    cfg = RunConfig()
    if path:
        cfg.update(read_config_file(path), str(path))
    for dotted, value in (overrides or {}).items():
        if value is not None:
            cfg.set(dotted, value)
    return cfg


def derive_seed(seed: int, module: str) -> int:
    """Stable 32-bit seed for one module, from the run seed and the module's name."""
    digest = hashlib.sha256(f"{seed}:{module}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


def write_resolved(cfg: RunConfig, out_dir) -> Path:
    path = Path(out_dir) / "config.resolved.ini"
    cfg.write(path)
    return path
