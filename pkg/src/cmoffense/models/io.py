"""Model files.

Layout, one item per line::

    CMOF-MODEL v1 <kind>
    <JSON object with sorted keys>
    END sha256=<hex digest of the JSON line>

Floats go through ``repr`` inside JSON, which round-trips exactly, and
keys are sorted, so saving the same model twice gives identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from ..corpus import CorpusError, get_scheme
from .base import ModelError

MAGIC = "CMOF-MODEL"
VERSION = "v1"

_KINDS: dict = {}


def register_kind(kind: str, cls) -> None:
    """``cls`` needs ``to_dict()`` and ``from_dict(scheme, d)``."""
    _KINDS[kind] = cls


def _ensure_builtin_kinds():
    if all(k in _KINDS for k in ("mnb", "svm", "rf", "pipeline")):
        return
    from .. import pipeline  # registers itself
    from .forest import RfModel
    from .mnb import MnbModel
    from .svm import SvmModel

    for cls in (MnbModel, SvmModel, RfModel):
        register_kind(cls.kind, cls)


def dumps_model(model) -> str:
    _ensure_builtin_kinds()
    kind = getattr(model, "kind", None)
    if kind not in _KINDS:
        raise ModelError(f"cannot save objects of type {type(model).__name__}")
    body = {"scheme": model.scheme.name, "params": model.to_dict()}
    line = json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    digest = hashlib.sha256(line.encode("utf-8")).hexdigest()
    return f"{MAGIC} {VERSION} {kind}\n{line}\nEND sha256={digest}\n"


def loads_model(text: str, source: str = "<string>"):
    _ensure_builtin_kinds()
    lines = text.split("\n")
    header = lines[0].split(" ")
    if len(header) != 3 or header[0] != MAGIC:
        raise ModelError(f"{source}: not a model file (missing {MAGIC} header)")
    if header[1] != VERSION:
        raise ModelError(f"{source}: unsupported model file version {header[1]!r} (expected {VERSION})")
    kind = header[2]
    if kind not in _KINDS:
        raise ModelError(f"{source}: unknown model kind {kind!r}")
    if len(lines) < 3 or not lines[2].startswith("END sha256="):
        raise ModelError(f"{source}: truncated model file")
    body = lines[1]
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != lines[2][len("END sha256="):]:
        raise ModelError(f"{source}: checksum mismatch (file corrupted)")
    try:
        data = json.loads(body)
        scheme = get_scheme(data["scheme"])
        return _KINDS[kind].from_dict(scheme, data["params"])
    except (ValueError, KeyError, TypeError, CorpusError) as e:
        raise ModelError(f"{source}: malformed model body: {e}") from None


def save_model(model, path) -> None:
    Path(path).write_bytes(dumps_model(model).encode("utf-8"))


def load_model(path):
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ModelError(f"{path}: {e.strerror or e}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ModelError(f"{path}: not UTF-8 text") from None
    return loads_model(text, str(path))
