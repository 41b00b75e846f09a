"""Declarative experiments: one flat config file, one output directory.

A run goes through these steps:

1. read the target treebank and take a dev set, either from ``target_dev``
   or by splitting ``target_train`` with ``split_ratio``;
2. subsample the target training data (``subsample``, 0 keeps all);
3. augment it (``augment``: ``none``, ``morph``, ``nonce`` or ``morph+nonce``);
4. optionally transliterate source and target (``translit``);
5. train on the target alone or on source plus target (``cross_lingual``);
6. optionally fine-tune on the target (``fine_tune``);
7. parse the dev set and score it.

See ``docs/experiment-config.md`` for every key. Input paths are
relative to the config file; a ``toy:`` prefix points into the bundled
toy treebanks.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .augment.morph import MorphConfig, morph_augment
from .augment.nonce import NonceConfig, build_lexicon_index, nonce_augment
from .conllu import Treebank, read_conllu, write_conllu
from .evaluation import EvalReport, score
from .model import TransitionParser, load_external_embeddings
from .runinfo import ConfigError, to_bool
from .translit import get_table, transliterate_treebank
from .treebank_ops import SplitSpec, split_treebank, subsample

log = logging.getLogger(__name__)

MODEL_KEYS = {
    "dim_word": int, "dim_char": int, "dim_char_lstm": int, "dim_word_lstm": int,
    "word_lstm_layers": int, "dim_lang": int, "dim_mlp_hidden": int,
    "learning_rate": float, "epochs_max": int, "patience": int, "loss_margin": float,
    "word_dropout": float, "oracle": str, "exploration_prob": float,
    "exploration_from_epoch": int,
}

DEFAULTS = {
    "seed": "0",
    "source_train": "",
    "source_lang": "src",
    "target_train": "",
    "target_lang": "tgt",
    "target_dev": "",
    "split_ratio": "0.5",
    "subsample": "0",
    "augment": "none",
    "p_crop": "0.3",
    "p_rotate": "0.3",
    "max_crops": "3",
    "max_rotations": "3",
    "core_labels": "nsubj,obj,iobj,obl",
    "nonce_copies": "5",
    "p_replace": "0.5",
    "content_pos": "NOUN,VERB,ADJ",
    "translit": "none",
    "translit_fields": "form,lemma",
    "cross_lingual": "true",
    "fine_tune": "true",
    "embeddings": "",
    "embeddings_translit": "",
    "out_dir": "",
}
DEFAULTS.update({k: "" for k in MODEL_KEYS})


@dataclass
class PipelineResult:
    settings: dict
    report: EvalReport
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    base_las: Optional[float] = None
    sizes: dict = field(default_factory=dict)

    def summary(self) -> str:
        parts = [f"{k} {v}" for k, v in self.sizes.items()]
        if self.base_las is not None:
            parts.append(f"pre-fine-tune dev LAS {100 * self.base_las:.2f}")
        parts.append(f"dev LAS {100 * self.report.las:.2f}")
        parts.append(f"UAS {100 * self.report.uas:.2f}")
        return "\n".join(parts)


def resolve_path(value: str, base_dir: Path) -> Path:
    if value.startswith("toy:"):
        ref = resources.files("lowparse.data").joinpath("toy", value[4:])
        return Path(str(ref))
    p = Path(value)
    return p if p.is_absolute() else Path(base_dir) / p


def _get(settings: dict, key: str, typ=str):
    raw = settings[key]
    try:
        return to_bool(raw) if typ is bool else typ(raw)
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"experiment key {key!r}: cannot read {raw!r} ({exc})") from None


def _csv(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def normalise(settings: dict) -> dict:
    unknown = sorted(set(settings) - set(DEFAULTS))
    if unknown:
        raise ConfigError(
            f"unknown experiment key(s): {', '.join(unknown)}; "
            "see docs/experiment-config.md for the accepted keys"
        )
    merged = dict(DEFAULTS)
    merged.update(settings)
    if not merged["target_train"]:
        raise ConfigError("experiment needs 'target_train'")
    if _get(merged, "cross_lingual", bool) and not merged["source_train"]:
        raise ConfigError("cross_lingual = true needs 'source_train'")
    if merged["augment"] not in ("none", "morph", "nonce", "morph+nonce"):
        raise ConfigError(f"augment must be none, morph, nonce or morph+nonce, got {merged['augment']!r}")
    return merged


def _read(path: Path, lang: str) -> Treebank:
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    return read_conllu(path, language=lang)


def run_pipeline(settings: dict, base_dir=".", out_dir="runs/experiment") -> PipelineResult:
    s = normalise(settings)
    base_dir, out_dir = Path(base_dir), Path(out_dir)
    (out_dir / "data").mkdir(parents=True, exist_ok=True)
    seed = _get(s, "seed", int)
    inputs, outputs, sizes = [], [], {}

    def save(tb: Treebank, name: str) -> Path:
        path = out_dir / "data" / name
        write_conllu(tb, path)
        outputs.append(path)
        return path

    tgt_lang = s["target_lang"]
    tgt_path = resolve_path(s["target_train"], base_dir)
    target = _read(tgt_path, tgt_lang)
    inputs.append(tgt_path)
    if s["target_dev"]:
        dev_path = resolve_path(s["target_dev"], base_dir)
        dev = _read(dev_path, tgt_lang)
        inputs.append(dev_path)
    else:
        target, dev = split_treebank(target, SplitSpec(_get(s, "split_ratio", float), seed))
    count = _get(s, "subsample", int)
    if count:
        target = subsample(target, count, seed)
    sizes["target_train"] = len(target)

    augment = s["augment"]
    augmented = target
    try:
        cfg = MorphConfig(
            frozenset(_csv(s["core_labels"])), _get(s, "p_crop", float), _get(s, "p_rotate", float),
            _get(s, "max_crops", int), _get(s, "max_rotations", int), seed,
        )
        ncfg = NonceConfig(_get(s, "p_replace", float), _get(s, "nonce_copies", int),
                           frozenset(_csv(s["content_pos"])), seed)
    except ValueError as exc:
        raise ConfigError(f"augmentation settings: {exc}") from None
    if "morph" in augment:
        augmented = morph_augment(augmented, cfg)
    if "nonce" in augment:
        # nonce copies are made of the target originals only
        extra = nonce_augment(target, build_lexicon_index(target, ncfg), ncfg)
        augmented = augmented.replace(sentences=augmented.sentences + extra.sentences[len(target):])
    sizes["target_augmented"] = len(augmented)

    source = None
    if _get(s, "cross_lingual", bool):
        src_path = resolve_path(s["source_train"], base_dir)
        source = _read(src_path, s["source_lang"])
        inputs.append(src_path)
        sizes["source_train"] = len(source)

    if s["translit"] not in ("", "none"):
        table = get_table(s["translit"])
        fields = _csv(s["translit_fields"])
        augmented = transliterate_treebank(augmented, table, fields)
        dev = transliterate_treebank(dev, table, fields)
        if source is not None:
            source = transliterate_treebank(source, table, fields)
            save(source, "source.conllu")

    save(augmented, "train.conllu")
    save(dev, "dev.conllu")

    external = None
    if s["embeddings"]:
        files = [resolve_path(f, base_dir) for f in _csv(s["embeddings"])]
        for f in files:
            if not f.is_file():
                raise FileNotFoundError(f"embedding file not found: {f}")
        table = get_table(s["embeddings_translit"]) if s["embeddings_translit"] else None
        external = load_external_embeddings(files, table)
        inputs.extend(files)

    params = {k: _get(s, k, typ) for k, typ in MODEL_KEYS.items() if s[k] != ""}
    parser = TransitionParser(**params, external_embeddings=external, seed=seed)
    train_sets = [source, augmented] if source is not None else [augmented]
    parser.fit(train_sets, dev=dev)
    model_path = out_dir / "model.pt"
    parser.save(model_path)
    outputs.append(model_path)

    base_las = None
    if source is not None and _get(s, "fine_tune", bool):
        base_las = parser.best_dev_las_
        parser = parser.fine_tune(augmented, dev)
        tuned_path = out_dir / "model.finetuned.pt"
        parser.save(tuned_path)
        outputs.append(tuned_path)

    pred = parser.predict(dev)
    pred_path = out_dir / "dev.pred.conllu"
    write_conllu(pred, pred_path)
    outputs.append(pred_path)
    report = score(dev, pred)
    eval_path = out_dir / "eval.txt"
    eval_path.write_text(report.to_text(), encoding="utf-8")
    outputs.append(eval_path)
    settings_out = {k: v for k, v in s.items() if v != ""}
    return PipelineResult(settings_out, report, inputs, outputs, base_las, sizes)
