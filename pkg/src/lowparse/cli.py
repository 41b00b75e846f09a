"""Command-line interface: ``lowparse <command> [options]``.

Every option can also come from a flat ``key = value`` file given with
``--config``; flags on the command line win over the file, and the file
wins over built-in defaults. Exit status is 0 on success, 1 when input
data fails validation and 2 on usage errors (bad flags, missing files,
malformed config).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Optional

from . import __version__
from .conllu import ConlluError, Treebank, read_conllu, validate_tree, write_conllu
from .runinfo import ConfigError, read_config, to_bool, write_manifest

log = logging.getLogger("lowparse")

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class InvalidData(Exception):
    pass


# -- option plumbing -------------------------------------------------------

def _csv(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return list(text)
    return [x.strip() for x in str(text).split(",") if x.strip()]


def _add(p: argparse.ArgumentParser, flag: str, type=str, default=None, help="", **kw):
    """Register an option whose default is applied after config merging."""
    dest = flag.lstrip("-").replace("-", "_")
    p.set_defaults(**{f"_default_{dest}": (default, type)})
    if type is bool:
        p.add_argument(flag, dest=dest, type=to_bool, nargs="?", const=True, default=None, help=help, **kw)
    else:
        p.add_argument(flag, dest=dest, type=type, default=None, help=help, **kw)


def _resolve(args: argparse.Namespace, config: dict) -> dict:
    values = {}
    for name, spec in vars(args).items():
        if not name.startswith("_default_"):
            continue
        dest = name[len("_default_"):]
        default, typ = spec
        value = getattr(args, dest)
        if value is None and dest in config:
            raw = config[dest]
            try:
                value = to_bool(raw) if typ is bool else typ(raw)
            except (ValueError, ConfigError) as exc:
                raise UsageError(f"config key {dest!r}: {exc}") from None
        if value is None:
            value = default
        values[dest] = value
    return values


def _require(opts: dict, *names: str) -> None:
    missing = [n for n in names if opts.get(n) in (None, "", [])]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"missing required option(s): {flags}")


def _existing(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    return p


def _read(path, lang: str = "und") -> Treebank:
    p = _existing(path)
    try:
        return read_conllu(p, language=lang)
    except ConlluError as exc:
        raise InvalidData(f"{path}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise InvalidData(f"{path}: not UTF-8 ({exc.reason})") from None


def _lang_path(spec: str, default_lang: str = "und") -> tuple[str, str]:
    """``lang:path`` or a bare path."""
    lang, sep, path = spec.partition(":")
    if sep and lang and "/" not in lang and not Path(spec).exists():
        return lang, path
    return default_lang, spec


def _write_tb(tb: Treebank, path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    write_conllu(tb, p)
    return p


# -- commands ----------------------------------------------------------------

def cmd_validate(o, ctx):
    _require(o, "input")
    total_bad = 0
    for path in o["input"]:
        tb = _read(path)
        bad = 0
        for s, sid in zip(tb.sentences, tb.sentence_ids()):
            report = validate_tree(s, o["level"])
            for issue in report.issues:
                print(f"{path}\t{sid}\t{issue}")
            bad += not report.ok
        print(f"{path}\t{len(tb)} sentences\t{bad} with violations ({o['level']})", file=sys.stderr)
        total_bad += bad
    return EXIT_INVALID if total_bad else EXIT_OK


def cmd_split(o, ctx):
    from .treebank_ops import SplitSpec, split_treebank

    _require(o, "input", "train_out", "dev_out")
    tb = _read(o["input"])
    try:
        train, dev = split_treebank(tb, SplitSpec(o["ratio"], o["seed"]))
    except ValueError as exc:
        raise InvalidData(str(exc)) from None
    outs = [_write_tb(train, o["train_out"]), _write_tb(dev, o["dev_out"])]
    print(f"train {len(train)}\tdev {len(dev)}")
    ctx.finish([o["input"]], outs)


def cmd_subsample(o, ctx):
    from .treebank_ops import subsample

    _require(o, "input", "output", "count")
    tb = _read(o["input"])
    try:
        out = subsample(tb, o["count"], o["seed"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ctx.finish([o["input"]], [_write_tb(out, o["output"])])


def cmd_stats(o, ctx):
    from .treebank_ops import char_ngram_overlap, vocab_overlap

    _require(o, "target", "source")
    tgt, src = _read(o["target"]), _read(o["source"])
    lines = [
        f"target_sentences\t{len(tgt)}",
        f"target_tokens\t{sum(len(s) for s in tgt)}",
        f"source_sentences\t{len(src)}",
        f"source_tokens\t{sum(len(s) for s in src)}",
        f"token_overlap\t{vocab_overlap(tgt, src):.4f}",
        f"char{o['n']}_overlap\t{char_ngram_overlap(tgt, src, o['n']):.4f}",
    ]
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if o["output"]:
        out = Path(o["output"])
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        ctx.finish([o["target"], o["source"]], [out])


def cmd_augment_morph(o, ctx):
    from .augment.morph import MorphConfig, morph_augment

    _require(o, "input", "output")
    tb = _read(o["input"])
    try:
        cfg = MorphConfig(
            frozenset(_csv(o["core_labels"])), o["p_crop"], o["p_rotate"],
            o["max_crops"], o["max_rotations"], o["seed"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = morph_augment(tb, cfg)
    print(f"{len(tb)} original + {len(out) - len(tb)} augmented sentences")
    ctx.finish([o["input"]], [_write_tb(out, o["output"])])


def cmd_augment_nonce(o, ctx):
    from .augment.nonce import NonceConfig, build_lexicon_index, nonce_augment

    _require(o, "input", "output")
    tb = _read(o["input"])
    try:
        cfg = NonceConfig(o["p_replace"], o["copies"], frozenset(_csv(o["content_pos"])), o["seed"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    index_src = _read(o["index_from"]) if o["index_from"] else tb
    out = nonce_augment(tb, build_lexicon_index(index_src, cfg), cfg)
    print(f"{len(tb)} original + {len(out) - len(tb)} nonce sentences")
    inputs = [o["input"]] + ([o["index_from"]] if o["index_from"] else [])
    ctx.finish(inputs, [_write_tb(out, o["output"])])


def cmd_translit(o, ctx):
    from .model.embeddings import load_external_embeddings, write_word2vec_text
    from .translit import get_table, transliterate_treebank

    _require(o, "input", "output", "table")
    try:
        table = get_table(o["table"])
    except OSError:
        raise UsageError(f"unknown table {o['table']!r}: not a builtin name or readable file") from None
    except ValueError as exc:
        raise InvalidData(f"table {o['table']}: {exc}") from None
    out = Path(o["output"])
    out.parent.mkdir(parents=True, exist_ok=True)
    if o["format"] == "word2vec":
        try:
            emb = load_external_embeddings([_existing(o["input"])], table)
        except ValueError as exc:
            raise InvalidData(str(exc)) from None
        write_word2vec_text(emb, out)
    else:
        tb = _read(o["input"])
        _write_tb(transliterate_treebank(tb, table, _csv(o["fields"])), out)
    ctx.finish([o["input"]], [out])


def cmd_oracle(o, ctx):
    from .transition import static_oracle

    _require(o, "input")
    tb = _read(o["input"])
    bad = 0
    for s, sid in zip(tb.sentences, tb.sentence_ids()):
        if not validate_tree(s).ok:
            print(f"{sid}\tskipped: not a well-formed tree")
            bad += 1
            continue
        print(f"{sid}\t" + " ".join(map(str, static_oracle(s))))
    return EXIT_INVALID if bad else EXIT_OK


MODEL_OPTS = [
    ("--dim-word", int, 100), ("--dim-char", int, 24), ("--dim-char-lstm", int, 100),
    ("--dim-word-lstm", int, 125), ("--word-lstm-layers", int, 2), ("--dim-lang", int, 12),
    ("--dim-mlp-hidden", int, 100), ("--learning-rate", float, 1e-3), ("--epochs-max", int, 30),
    ("--patience", int, 5), ("--loss-margin", float, 1.0), ("--word-dropout", float, 0.25),
    ("--oracle", str, "static_dynamic"), ("--exploration-prob", float, 0.1),
    ("--exploration-from-epoch", int, 2),
]


FINETUNE_KEYS = {
    "learning_rate", "epochs_max", "patience", "loss_margin", "word_dropout",
    "oracle", "exploration_prob", "exploration_from_epoch",
}


def _model_params(o) -> dict:
    keys = [f.lstrip("-").replace("-", "_") for f, _, _ in MODEL_OPTS]
    return {k: o[k] for k in keys}


def _external(o):
    from .model.embeddings import load_external_embeddings
    from .translit import get_table

    files = _csv(o.get("embeddings") or "")
    if not files:
        return None, []
    table = get_table(o["embeddings_translit"]) if o.get("embeddings_translit") else None
    try:
        return load_external_embeddings([_existing(f) for f in files], table), files
    except ValueError as exc:
        raise InvalidData(str(exc)) from None


def _treebanks(specs, default_lang):
    tbs, paths = [], []
    for spec in specs:
        lang, path = _lang_path(spec, default_lang)
        tbs.append(_read(path, lang))
        paths.append(path)
    return tbs, paths


def cmd_train(o, ctx):
    from .model import TransitionParser

    _require(o, "train", "dev", "model_out")
    train, train_paths = _treebanks(o["train"], o["lang"])
    (dev,), dev_paths = _treebanks([o["dev"]], o["lang"])
    ext, ext_paths = _external(o)
    try:
        parser = TransitionParser(**_model_params(o), external_embeddings=ext, seed=o["seed"])
        parser.fit(train, dev=dev)
    except ValueError as exc:
        raise InvalidData(str(exc)) from None
    out = Path(o["model_out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    parser.save(out)
    print(f"best dev LAS {100 * parser.best_dev_las_:.2f} at epoch {parser.best_epoch_}")
    ctx.finish(train_paths + dev_paths + ext_paths, [out])


def _load_model(path):
    from .model import TransitionParser

    try:
        return TransitionParser.load(_existing(path))
    except UsageError:
        raise
    except Exception as exc:  # torch raises a variety of unpickling errors
        raise InvalidData(f"cannot load model {path}: {exc}") from None


def cmd_finetune(o, ctx):
    _require(o, "model", "train", "dev", "model_out")
    model = _load_model(o["model"])
    (target,), tpaths = _treebanks(o["train"], o["lang"])
    (dev,), dpaths = _treebanks([o["dev"]], target.language)
    params = {k: v for k, v in _model_params(o).items() if ctx.given(k)}
    ignored = sorted(set(params) - FINETUNE_KEYS)
    if ignored:
        log.warning("architecture options are fixed by the model; ignoring %s", ", ".join(ignored))
    params = {k: v for k, v in params.items() if k in FINETUNE_KEYS}
    model.set_params(**params)
    model.config_ = dataclasses.replace(
        model.config_, **{k: v for k, v in params.items() if hasattr(model.config_, k)}
    )
    try:
        tuned = model.fine_tune(target, dev)
    except ValueError as exc:
        raise InvalidData(str(exc)) from None
    out = Path(o["model_out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    tuned.save(out)
    print(f"dev LAS {100 * tuned.start_dev_las_:.2f} -> {100 * tuned.best_dev_las_:.2f}")
    ctx.finish([o["model"]] + tpaths + dpaths, [out])


def cmd_parse(o, ctx):
    _require(o, "model", "input", "output")
    model = _load_model(o["model"])
    lang, path = _lang_path(o["input"], o["lang"])
    tb = _read(path, lang)
    if o["fallback_language"]:
        model.set_params(fallback_language=o["fallback_language"])
    try:
        pred = model.predict(tb)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ctx.finish([o["model"], path], [_write_tb(pred, o["output"])])


def cmd_eval(o, ctx):
    from .evaluation import score

    _require(o, "gold", "pred")
    gold, pred = _read(o["gold"]), _read(o["pred"])
    try:
        report = score(gold, pred, strip_subtypes=o["strip_subtypes"], include_punct=o["include_punct"])
    except ValueError as exc:
        raise InvalidData(str(exc)) from None
    text = report.to_text()
    sys.stdout.write(text)
    if o["output"]:
        out = Path(o["output"])
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        ctx.finish([o["gold"], o["pred"]], [out])


def _reps(path, model, layer, lang, out_dir, tag):
    """A representation dump, extracting it first when given CoNLL-U."""
    from .representations import Representations

    if str(path).endswith(".conllu"):
        if model is None:
            raise UsageError(f"{path} is CoNLL-U; pass --model to extract representations")
        lang, real = _lang_path(path, lang)
        reps = model.transform(_read(real, lang), layer=layer)
        if out_dir is not None:
            dump = Path(out_dir) / f"{tag}.{layer}.tsv"
            dump.parent.mkdir(parents=True, exist_ok=True)
            reps.write(dump)
            return reps, [dump]
        return reps, []
    try:
        return Representations.read(_existing(path)), []
    except ValueError as exc:
        raise InvalidData(f"{path}: {exc}") from None


def cmd_probe(o, ctx):
    from .analysis import probe_pos

    _require(o, "train", "dev")
    model = _load_model(o["model"]) if o["model"] else None
    out_dir = Path(o["output"]).parent if o["output"] else None
    train, d1 = _reps(o["train"], model, o["layer"], o["lang"], out_dir, "probe_train")
    dev, d2 = _reps(o["dev"], model, o["layer"], o["lang"], out_dir, "probe_dev")
    try:
        report = probe_pos(train, dev, hidden_dim=o["hidden_dim"], seed=o["seed"])
    except ValueError as exc:
        raise InvalidData(str(exc)) from None
    text = report.to_text()
    sys.stdout.write(text)
    if o["output"]:
        out = Path(o["output"])
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        ctx.finish([o["train"], o["dev"]] + ([o["model"]] if o["model"] else []), d1 + d2 + [out])


def cmd_neighbors(o, ctx):
    from .analysis import mask_from_keys, nearest_neighbors
    from .evaluation import head_win_filter

    _require(o, "target", "source")
    model = _load_model(o["model"]) if o["model"] else None
    out_dir = Path(o["output"]).parent if o["output"] else None
    tgt, d1 = _reps(o["target"], model, o["layer"], o["lang"], out_dir, "nn_target")
    src, d2 = _reps(o["source"], model, o["layer"], o["lang"], out_dir, "nn_source")
    mask = None
    inputs = [o["target"], o["source"]]
    if o["filter_gold"]:
        _require(o, "filter_pred_a", "filter_pred_b")
        gold = _read(o["filter_gold"])
        a, b = _read(o["filter_pred_a"]), _read(o["filter_pred_b"])
        try:
            wins = head_win_filter(gold, a, b)
        except ValueError as exc:
            raise InvalidData(str(exc)) from None
        ids = gold.sentence_ids()
        mask = mask_from_keys(tgt, {(ids[i], tid) for i, tid in wins})
        inputs += [o["filter_gold"], o["filter_pred_a"], o["filter_pred_b"]]
    try:
        report = nearest_neighbors(tgt, src, k=o["k"], tags=_csv(o["tags"]), target_mask=mask)
    except ValueError as exc:
        raise InvalidData(str(exc)) from None
    text = report.to_text()
    sys.stdout.write(text)
    if o["output"]:
        out = Path(o["output"])
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        ctx.finish(inputs, d1 + d2 + [out])


def cmd_confusion_diff(o, ctx):
    from .evaluation import confusion_diff, read_label_groups

    _require(o, "gold", "pred_a", "pred_b", "output")
    gold, a, b = _read(o["gold"]), _read(o["pred_a"]), _read(o["pred_b"])
    groups = read_label_groups(_existing(o["groups"])) if o["groups"] else None
    try:
        diff = confusion_diff(gold, a, b, groups, strip_subtypes=o["strip_subtypes"])
    except ValueError as exc:
        raise InvalidData(str(exc)) from None
    for row in diff.omitted_rows:
        print(f"omitted empty gold group: {row}", file=sys.stderr)
    out = Path(o["output"])
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(diff.to_csv(), encoding="utf-8")
    inputs = [o["gold"], o["pred_a"], o["pred_b"]] + ([o["groups"]] if o["groups"] else [])
    ctx.finish(inputs, [out])


def cmd_pipeline(o, ctx):
    from .pipeline import run_pipeline

    _require(o, "experiment")
    path = _existing(o["experiment"])
    try:
        settings = read_config(path)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    if ctx.given("seed"):
        settings["seed"] = str(o["seed"])
    out_dir = Path(o["out_dir"] or settings.get("out_dir") or Path("runs") / path.stem)
    try:
        result = run_pipeline(settings, base_dir=path.parent, out_dir=out_dir)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    except (ValueError, ConlluError) as exc:
        raise InvalidData(str(exc)) from None
    print(result.summary())
    ctx.config = result.settings
    ctx.seed = int(result.settings["seed"])
    ctx.finish([path] + result.inputs, result.outputs, out_dir=out_dir)


# -- parser construction -------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="flat key=value file; command-line flags override it")
    _add(p, "--seed", int, 0, "master random seed")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="lowparse",
        description="Treebank augmentation, transliteration and cross-lingual dependency parsing.",
    )
    top.add_argument("--version", action="version", version=f"lowparse {__version__}")
    top.add_argument("-v", "--verbose", action="count", default=0)
    sub = top.add_subparsers(dest="command", metavar="command")

    def command(name, func: Callable, help: str):
        p = sub.add_parser(name, help=help, description=help)
        p.set_defaults(func=func)
        _common(p)
        return p

    p = command("validate", cmd_validate, "check CoNLL-U files (exit 1 on any violation)")
    p.add_argument("input", nargs="*", default=None)
    p.set_defaults(_default_input=([], _csv))
    _add(p, "--level", str, "convention", "structure or convention", choices=["structure", "convention"])

    p = command("split", cmd_split, "shuffle and split a treebank into train and dev")
    _add(p, "--input")
    _add(p, "--train-out")
    _add(p, "--dev-out")
    _add(p, "--ratio", float, 0.5)

    p = command("subsample", cmd_subsample, "sample sentences without replacement, keeping order")
    _add(p, "--input")
    _add(p, "--output")
    _add(p, "--count", int)

    p = command("stats", cmd_stats, "token and character n-gram overlap of a target with a source")
    _add(p, "--target")
    _add(p, "--source")
    _add(p, "--n", int, 3)
    _add(p, "--output")

    p = command("augment-morph", cmd_augment_morph, "append cropped and rotated sentences")
    _add(p, "--input")
    _add(p, "--output")
    _add(p, "--p-crop", float, 0.3)
    _add(p, "--p-rotate", float, 0.3)
    _add(p, "--max-crops", int, 3)
    _add(p, "--max-rotations", int, 3)
    _add(p, "--core-labels", str, "nsubj,obj,iobj,obl")

    p = command("augment-nonce", cmd_augment_nonce, "append nonce sentences")
    _add(p, "--input")
    _add(p, "--output")
    _add(p, "--copies", int, 5)
    _add(p, "--p-replace", float, 0.5)
    _add(p, "--content-pos", str, "NOUN,VERB,ADJ")
    _add(p, "--index-from", str, None, "treebank to draw replacement words from (default: input)")

    p = command("translit", cmd_translit, "transliterate a treebank or a word2vec text file")
    _add(p, "--input")
    _add(p, "--output")
    _add(p, "--table", str, None, "builtin table name (turkish_fold, kazakh_cyr_lat) or TSV path")
    _add(p, "--fields", str, "form,lemma")
    _add(p, "--format", str, "conllu", choices=["conllu", "word2vec"])

    p = command("oracle", cmd_oracle, "print static-oracle transition sequences")
    _add(p, "--input")

    for name, func, help in (
        ("train", cmd_train, "train a parser on one or more treebanks"),
        ("finetune", cmd_finetune, "continue training a parser on the target treebank"),
    ):
        p = command(name, func, help)
        if name == "finetune":
            _add(p, "--model")
        p.add_argument("--train", action="append", default=None,
                       help="lang:path of a training treebank (repeatable)")
        p.set_defaults(_default_train=(None, _csv))
        _add(p, "--dev", str, None, "lang:path of the dev treebank")
        _add(p, "--lang", str, "und", "language for paths given without a lang: prefix")
        _add(p, "--model-out")
        for flag, typ, default in MODEL_OPTS:
            _add(p, flag, typ, default)
        _add(p, "--embeddings", str, None, "comma-separated word2vec text files, source first")
        _add(p, "--embeddings-translit", str, None, "table applied to embedding keys")

    p = command("parse", cmd_parse, "parse a CoNLL-U file with a trained model")
    _add(p, "--model")
    _add(p, "--input")
    _add(p, "--output")
    _add(p, "--lang", str, "und")
    _add(p, "--fallback-language")

    p = command("eval", cmd_eval, "LAS, UAS, per-label counts and rootless rate")
    _add(p, "--gold")
    _add(p, "--pred")
    _add(p, "--output")
    _add(p, "--strip-subtypes", bool, True)
    _add(p, "--include-punct", bool, True)

    p = command("probe", cmd_probe, "diagnostic POS classifier on frozen representations")
    _add(p, "--train", str, None, "representation TSV, or CoNLL-U with --model")
    _add(p, "--dev")
    _add(p, "--model")
    _add(p, "--layer", str, "word", choices=["char", "word"])
    _add(p, "--lang", str, "und")
    _add(p, "--hidden-dim", int, 64)
    _add(p, "--output")

    p = command("neighbors", cmd_neighbors, "cosine nearest source tokens for target tokens")
    _add(p, "--target")
    _add(p, "--source")
    _add(p, "--model")
    _add(p, "--layer", str, "word", choices=["char", "word"])
    _add(p, "--lang", str, "und")
    _add(p, "--k", int, 3)
    _add(p, "--tags", str, "ADJ,NOUN,PRON,VERB")
    _add(p, "--filter-gold")
    _add(p, "--filter-pred-a")
    _add(p, "--filter-pred-b")
    _add(p, "--output")

    p = command("confusion-diff", cmd_confusion_diff, "confusion matrix of A minus that of B, as CSV")
    _add(p, "--gold")
    _add(p, "--pred-a")
    _add(p, "--pred-b")
    _add(p, "--groups", str, None, "label<TAB>group file")
    _add(p, "--output")
    _add(p, "--strip-subtypes", bool, True)

    p = command("pipeline", cmd_pipeline, "run a declarative experiment file end to end")
    p.add_argument("experiment", nargs="?")
    p.set_defaults(_default_experiment=(None, str))
    _add(p, "--out-dir")
    return top


class Context:
    def __init__(self, argv, args, config, opts):
        self.argv = argv
        self.args = args
        self.config = opts
        self.seed = opts.get("seed")
        self.started = time.perf_counter()
        self.user_config = config

    def given(self, name: str) -> bool:
        return getattr(self.args, name, None) is not None or name in self.user_config

    def finish(self, inputs, outputs, out_dir: Optional[Path] = None):
        """Write a manifest into every directory that received output."""
        outputs = [Path(p) for p in outputs]
        if out_dir is not None:
            groups = {Path(out_dir): outputs}
        else:
            groups = {}
            for p in outputs:
                groups.setdefault(p.parent, []).append(p)
        for d, files in groups.items():
            write_manifest(d, self.argv, _jsonable(self.config), inputs, files, self.seed,
                           time.perf_counter() - self.started)


def _jsonable(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, (str, int, float, bool, type(None))):
            out[k] = v
        elif isinstance(v, (list, tuple)):
            out[k] = [str(x) for x in v]
        else:
            out[k] = str(v)
    return out


def run(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if not getattr(args, "command", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = read_config(args.config) if args.config else {}
        opts = _resolve(args, config)
        ctx = Context(argv, args, config, opts)
        code = args.func(opts, ctx)
    except (UsageError, ConfigError) as exc:
        print(f"lowparse {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidData as exc:
        print(f"lowparse {args.command}: invalid data: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK if code is None else code


def main() -> None:
    sys.exit(run())
