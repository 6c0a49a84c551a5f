"""Command-line front end.

Exit status: 0 on success, 1 for data or runtime errors, 2 for usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import corpus as C
from .config import ConfigError, RunConfig, derive_seed, load_config, write_resolved
from .ensemble import EnsembleConfig, EnsembleError, average, load_predictions, save_predictions
from .evaluation import EvalError, evaluate
from .features import write_scores
from .models import KINDS, ModelError, load_model, save_model
from .pipeline import Pipeline, TextEncoder, featurize, fit, k_grid, sweep, validation_f1
from .preprocess import PRESETS, EmojiMode, normalize_all, with_overrides
from .tokenize import TokenizerError, TokenizerTrainConfig, UnigramModel, train_unigram

log = logging.getLogger("cmoffense")

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- configuration helpers ------------------------------------------------------

def _overrides(args, mapping: dict[str, str]) -> dict[str, object]:
    out = {}
    for attr, dotted in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            out[dotted] = value
    return out


def _resolve(args, mapping: dict[str, str]) -> RunConfig:
    cfg = load_config(args.config, _overrides(args, mapping))
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        key, value = item.split("=", 1)
        cfg.set(key.strip(), value.strip())
    return cfg


def _scheme(cfg: RunConfig) -> C.LabelScheme:
    try:
        return C.get_scheme(cfg.get("data", "scheme"))
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _format(cfg: RunConfig) -> str:
    fmt = cfg.get("data", "format")
    if fmt not in C.FORMATS:
        raise ConfigError(f"data.format must be one of {', '.join(C.FORMATS)}")
    return fmt


def preprocess_config(cfg: RunConfig):
    sec = cfg.section("preprocess")
    preset = sec["preset"].lower()
    if preset not in PRESETS:
        raise ConfigError(f"unknown preprocess preset {preset!r}; choose from {', '.join(PRESETS)}")
    changes = {}
    for key in ("lowercase", "strip_punctuation", "strip_mentions", "stopword_removal", "stem_english"):
        if sec[key]:
            value = sec[key].lower()
            if value not in ("true", "false", "1", "0", "yes", "no", "on", "off"):
                raise ConfigError(f"preprocess.{key} must be a boolean")
            changes[key] = value in ("true", "1", "yes", "on")
    if sec["emoji_mode"]:
        try:
            changes["emoji_mode"] = EmojiMode(sec["emoji_mode"].lower())
        except ValueError:
            raise ConfigError(f"preprocess.emoji_mode must be keep, remove or describe") from None
    resolved = with_overrides(PRESETS[preset], **changes)
    # record the effective flags so the written config stands on its own
    for key, value in resolved.to_dict().items():
        cfg.text["preprocess"][key] = str(value).lower()
    return resolved


def tokenizer_config(cfg: RunConfig) -> TokenizerTrainConfig:
    sec = cfg.section("tokenizer")
    try:
        return TokenizerTrainConfig(
            target_vocab=sec["target_vocab"],
            seed_max_piece_len=sec["seed_max_piece_len"],
            em_iterations_per_round=sec["em_iterations_per_round"],
            prune_keep_fraction=sec["prune_keep_fraction"],
            min_piece_count=sec["min_piece_count"],
        )
    except TokenizerError as e:
        raise ConfigError(str(e)) from None


def model_kind(cfg: RunConfig) -> str:
    kind = cfg.get("model", "kind").lower()
    if kind not in KINDS:
        raise ConfigError(f"unknown model kind {kind!r}; choose from {', '.join(KINDS)}")
    return kind


def _class_weight(text: str):
    t = text.lower()
    if t in ("", "none"):
        return None
    if t != "balanced":
        raise ConfigError("model.class_weight must be none or balanced")
    return t


def model_params(cfg: RunConfig, kind: str) -> dict:
    m = cfg.section("model")
    seed = cfg.get("run", "seed")
    if kind == "mnb":
        return {"alpha": m["alpha"]}
    if kind == "svm":
        return {"lam": m["lam"], "epochs": m["epochs"], "seed": derive_seed(seed, "svm"),
                "class_weight": _class_weight(m["class_weight"])}
    return {"n_trees": m["n_trees"], "max_depth": m["max_depth"], "seed": derive_seed(seed, "rf"),
            "features_per_split": m["features_per_split"], "bootstrap": m["bootstrap"],
            "n_jobs": cfg.threads()}


def sweep_grid(cfg: RunConfig, kind: str) -> dict:
    s = cfg.section("sweep")
    fixed = {k: [v] for k, v in model_params(cfg, kind).items()}
    if kind == "mnb":
        fixed["alpha"] = list(s["alpha_grid"])
    elif kind == "svm":
        fixed["lam"] = list(s["lam_grid"])
        fixed["epochs"] = list(s["epochs_grid"])
    else:
        fixed["n_trees"] = list(s["n_trees_grid"])
        fixed["max_depth"] = list(s["max_depth_grid"])
    for key, values in fixed.items():
        if not values:
            raise ConfigError(f"empty sweep grid for {key}")
    return fixed


def parse_k_grid(text: str, vocab_size: int) -> list[int]:
    text = text.strip().lower()
    if text == "auto":
        return k_grid(vocab_size)
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if item == "all":
            out.append(vocab_size)
            continue
        try:
            k = int(item)
        except ValueError:
            raise ConfigError(f"bad k in features.k_grid: {item!r}") from None
        if k < 1:
            raise ConfigError("features.k_grid values must be positive")
        out.append(k)
    if not out:
        raise ConfigError("features.k_grid is empty")
    return out


def _ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _load(path, cfg, scheme=None) -> C.Dataset:
    return C.load_dataset(path, scheme or _scheme(cfg), _format(cfg))


def _encoder(cfg: RunConfig) -> TextEncoder:
    path = cfg.get("tokenizer", "model")
    sub = UnigramModel.load(path) if path else None
    return TextEncoder(preprocess_config(cfg), sub)


# -- commands -------------------------------------------------------------------

COMMON = {"seed": "run.seed", "scheme": "data.scheme", "format": "data.format", "threads": "run.threads"}
PRE = {"preset": "preprocess.preset", "emoji_mode": "preprocess.emoji_mode"}


def cmd_split(args) -> int:
    cfg = _resolve(args, {**COMMON, "ratios": "split.ratios"})
    if args.no_stratify:
        cfg.set("split.stratified", "false")
    ratios = cfg.get("split", "ratios")
    try:
        spec = C.SplitSpec(tuple(ratios), derive_seed(cfg.get("run", "seed"), "split"),
                           cfg.get("split", "stratified"))
    except ValueError as e:
        raise ConfigError(f"split.ratios: {e}") from None
    ds = _load(args.input, cfg)
    out = _ensure_dir(args.out)
    for name, part in zip(("train", "valid", "test"), C.split(ds, spec)):
        C.save_dataset(part, out / f"{name}.tsv")
        print(f"{name}\t{len(part)}")
    write_resolved(cfg, out)
    return EXIT_OK


def cmd_transfer_prep(args) -> int:
    if not args.olid and not args.task:
        raise UsageError("transfer-prep needs at least one input dataset (--olid or --task)")
    cfg = _resolve(args, COMMON)
    parts = []
    if args.olid:
        parts.append(C.load_olid(args.olid))
    for scheme_name, path in args.task or []:
        try:
            scheme = C.get_scheme(scheme_name)
        except ValueError as e:
            raise UsageError(str(e)) from None
        parts.append(C.load_dataset(path, scheme, _format(cfg)))
    combined = C.combine_for_transfer(parts)
    out = Path(args.out)
    _ensure_dir(out.parent)
    C.save_dataset(combined, out)
    write_resolved(cfg, out.parent)
    print(f"rows\t{len(combined)}")
    return EXIT_OK


def cmd_train_tokenizer(args) -> int:
    cfg = _resolve(args, {**COMMON, **PRE, "target_vocab": "tokenizer.target_vocab"})
    tcfg = tokenizer_config(cfg)
    ds = _load(args.input, cfg)
    texts = normalize_all(ds.texts, preprocess_config(cfg))
    model = train_unigram(texts, tcfg)
    out = Path(args.out)
    _ensure_dir(out.parent)
    model.save(out)
    write_resolved(cfg, out.parent)
    print(f"pieces\t{len(model)}")
    return EXIT_OK


TRAIN_FLAGS = {
    **COMMON, **PRE,
    "model": "model.kind", "k": "features.k", "k_grid": "features.k_grid",
    "alpha": "model.alpha", "lam": "model.lam", "epochs": "model.epochs",
    "class_weight": "model.class_weight", "n_trees": "model.n_trees", "max_depth": "model.max_depth",
    "tokenizer": "tokenizer.model",
}


def cmd_train(args) -> int:
    cfg = _resolve(args, TRAIN_FLAGS)
    kind = model_kind(cfg)
    scheme = _scheme(cfg)
    encoder = _encoder(cfg)
    do_sweep = args.sweep or args.command == "sweep"
    if do_sweep and not args.valid:
        raise UsageError("a sweep needs --valid")
    train_ds = _load(args.train, cfg, scheme)
    valid_ds = _load(args.valid, cfg, scheme) if args.valid else None
    for name, ds in (("training", train_ds), ("validation", valid_ds)):
        if ds is not None and any(l is None for l in ds.labels):
            raise C.CorpusError(f"{name} data contains unlabelled posts")
    out = _ensure_dir(args.out)
    feats = featurize(train_ds, valid_ds, encoder)
    log.info("vocabulary: %d tokens from %d documents", len(feats.vocab), len(train_ds))

    if do_sweep:
        ks = parse_k_grid(cfg.get("features", "k_grid"), len(feats.vocab))
        grid = sweep_grid(cfg, kind)
        write_scores(feats.mi, feats.vocab, out / "mi_scores.tsv")
        swept = sorted(k for k, v in grid.items() if len(v) > 1)
        with open(out / "sweep.tsv", "w", encoding="utf-8", newline="") as f:
            f.write("\t".join(["k", "n_features"] + swept + ["weighted_f1"]) + "\n")

            def record(res):
                cells = [str(res.k), str(res.n_features)] + [str(res.params[p]) for p in swept]
                f.write("\t".join(cells + [f"{res.weighted_f1:.6f}"]) + "\n")
                f.flush()
                log.info("k=%d %s weighted_f1=%.4f", res.k, res.params, res.weighted_f1)

            pipe, results = sweep(feats, scheme, encoder, kind, ks, grid, record)
        best = max(results, key=lambda r: r.weighted_f1)  # max keeps the first of equal scores
        cfg.set("features.k", str(best.k))
        for p in swept:
            value = best.params[p]
            cfg.set(f"model.{p}", "none" if value is None else str(value))
        score = best.weighted_f1
    else:
        pipe = fit(feats, scheme, encoder, kind, model_params(cfg, kind), cfg.get("features", "k"))
        score = validation_f1(pipe, feats) if valid_ds is not None else None
    save_model(pipe, out / "model.cmof")
    write_resolved(cfg, out)
    print(f"n_features={len(pipe.vocab)}")
    if score is not None:
        print(f"weighted_f1={score:.4f}")
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = _resolve(args, COMMON)
    pipe = load_model(args.model)
    if not isinstance(pipe, Pipeline):
        raise ModelError(f"{args.model}: not a text pipeline model (kind {pipe.kind!r})")
    ds = C.load_dataset(args.input, pipe.scheme, _format(cfg))
    model_id = args.model_id or Path(args.model).parent.name or Path(args.model).stem
    pset = pipe.predict_set(ds, model_id)
    out = Path(args.out)
    _ensure_dir(out.parent)
    save_predictions(pset, out)
    write_resolved(cfg, out.parent)
    print(f"rows\t{len(pset)}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _resolve(args, COMMON)
    scheme = _scheme(cfg)
    gold = _load(args.gold, cfg, scheme)
    pset = load_predictions(args.pred, scheme)
    pred = {i: row for i, row in zip(pset.ids, pset.probs)}
    missing = next((i for i in gold.ids if i not in pred), None)
    if missing is not None:
        raise EvalError(f"post id {missing!r} from {args.gold} has no prediction in {args.pred}")
    gold_ids = set(gold.ids)
    extra = next((i for i in pset.ids if i not in gold_ids), None)
    if extra is not None:
        raise EvalError(f"post id {extra!r} in {args.pred} is not in {args.gold}")
    unlabelled = next((p.id for p in gold if p.label is None), None)
    if unlabelled is not None:
        raise EvalError(f"post id {unlabelled!r} in {args.gold} has no gold label")
    labels = scheme.labels
    y_pred = [labels[int(pred[i].argmax())] for i in gold.ids]
    rep = evaluate(gold.labels, y_pred, scheme)
    text = rep.to_table() + "\n" + rep.to_keyvalue()
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_ensemble(args) -> int:
    if len(args.preds) < 2:
        raise UsageError("ensemble needs at least two prediction files")
    cfg = _resolve(args, COMMON)
    sets = [load_predictions(p, model_id=f"{Path(p).stem}") for p in args.preds]
    weights = None
    if args.weights:
        try:
            weights = tuple(float(w) for w in args.weights.split(","))
        except ValueError:
            raise UsageError(f"--weights must be comma-separated numbers") from None
        if len(weights) != len(sets):
            raise UsageError(f"{len(weights)} weights for {len(sets)} prediction files")
        if any(w < 0 for w in weights) or sum(weights) <= 0:
            raise UsageError("weights must be non-negative with a positive sum")
    result = average(sets, EnsembleConfig((), weights) if weights else None)
    out = Path(args.out)
    _ensure_dir(out.parent)
    save_predictions(result, out)
    write_resolved(cfg, out.parent)
    print(f"rows\t{len(result)}")
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file with per-module sections")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                   help="override one config value (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--scheme", help="label scheme: tamil, malayalam, kannada, full, combined")
    p.add_argument("--format", choices=C.FORMATS)
    p.add_argument("--threads", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def _preprocess_flags(p):
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--emoji-mode", dest="emoji_mode", choices=[m.value for m in EmojiMode])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmoffense", description="Offensive-language identification for code-mixed text"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="stratified train/valid/test split")
    p.add_argument("input")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--ratios", help="comma-separated train,valid,test ratios")
    p.add_argument("--no-stratify", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("transfer-prep", help="merge OLID and task datasets into the 5-label scheme")
    p.add_argument("--olid", help="OLID TSV file")
    p.add_argument("--task", nargs=2, action="append", metavar=("SCHEME", "PATH"),
                   help="task dataset and its scheme (repeatable)")
    p.add_argument("-o", "--out", required=True, help="output TSV")
    _common(p)
    p.set_defaults(func=cmd_transfer_prep)

    p = sub.add_parser("train-tokenizer", help="train a unigram subword model")
    p.add_argument("input")
    p.add_argument("-o", "--out", required=True, help="output model file")
    p.add_argument("--target-vocab", dest="target_vocab", type=int)
    _preprocess_flags(p)
    _common(p)
    p.set_defaults(func=cmd_train_tokenizer)

    for name, help_text in (("train", "train one classifier"), ("sweep", "grid-search k and hyperparameters")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--train", required=True)
        p.add_argument("--valid")
        p.add_argument("-o", "--out", required=True, help="output directory")
        p.add_argument("--model", choices=KINDS)
        p.add_argument("--k", help="keep the top-k features by mutual information, or 'all'")
        p.add_argument("--k-grid", dest="k_grid", help="comma-separated k values for --sweep ('auto', 'all')")
        p.add_argument("--alpha", type=float)
        p.add_argument("--lam", type=float)
        p.add_argument("--epochs", type=int)
        p.add_argument("--class-weight", dest="class_weight", choices=["none", "balanced"])
        p.add_argument("--n-trees", dest="n_trees", type=int)
        p.add_argument("--max-depth", dest="max_depth")
        p.add_argument("--tokenizer", help="unigram model file; default splits on whitespace")
        if name == "train":
            p.add_argument("--sweep", action="store_true", help="grid-search instead of a single fit")
        else:
            p.set_defaults(sweep=True)
        _preprocess_flags(p)
        _common(p)
        p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write a prediction file")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--model-id", dest="model_id")
    _common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a prediction file against gold labels")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("-o", "--out", help="also write the report here")
    _common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ensemble", help="average prediction files")
    p.add_argument("preds", nargs="+")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--weights", help="comma-separated member weights")
    _common(p)
    p.set_defaults(func=cmd_ensemble)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (UsageError, ConfigError) as e:
        print(f"cmoffense {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        where = e.filename if e.filename is not None else ""
        print(f"cmoffense {args.command}: error: {where}: {e.strerror or e}", file=sys.stderr)
        return EXIT_DATA
    except (C.CorpusError, ModelError, EnsembleError, EvalError, TokenizerError, ValueError) as e:
        print(f"cmoffense {args.command}: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
