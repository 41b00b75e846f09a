"""Train/dev splits, subsampling and corpus overlap statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .conllu import Treebank
from .rng import stream


@dataclass(frozen=True)
class SplitSpec:
    ratio: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"split ratio must lie strictly in (0, 1), got {self.ratio}")


def split_treebank(tb: Treebank, spec: SplitSpec) -> tuple[Treebank, Treebank]:
    """Shuffle by seed, then give ``floor(ratio * n)`` sentences to train.

    Both halves are non-empty. Each half keeps the original sentence order.
    """
    n = len(tb)
    if n < 2:
        raise ValueError(f"cannot split a treebank of {n} sentence(s)")
    n_train = min(max(math.floor(spec.ratio * n), 1), n - 1)
    order = stream(spec.seed, "split").permutation(n)
    train_idx = sorted(order[:n_train].tolist())
    dev_idx = sorted(order[n_train:].tolist())
    return (
        tb.replace(sentences=tuple(tb.sentences[i] for i in train_idx)),
        tb.replace(sentences=tuple(tb.sentences[i] for i in dev_idx)),
    )


def subsample(tb: Treebank, count: int, seed: int = 0) -> Treebank:
    if count < 1:
        raise ValueError("count must be positive")
    if count > len(tb):
        raise ValueError(f"cannot sample {count} of {len(tb)} sentences")
    keep = sorted(stream(seed, "subsample").choice(len(tb), size=count, replace=False).tolist())
    return tb.replace(sentences=tuple(tb.sentences[i] for i in keep))


def _forms(tb: Treebank):
    for s in tb:
        for t in s.tokens:
            yield t.form


def vocab_overlap(target: Treebank, source: Treebank) -> float:
    """Fraction of target running tokens whose exact form occurs in source."""
    source_forms = set(_forms(source))
    total = hits = 0
    for form in _forms(target):
        total += 1
        hits += form in source_forms
    if total == 0:
        raise ValueError("target treebank has no tokens")
    return hits / total


def char_ngrams(form: str, n: int) -> list[str]:
    return [form[i:i + n] for i in range(len(form) - n + 1)]


def char_ngram_overlap(target: Treebank, source: Treebank, n: int = 3) -> float:
    """Fraction of target token-level character n-grams seen in source.

    N-grams are taken inside each form without boundary padding, so forms
    shorter than ``n`` contribute nothing.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    source_grams = {g for form in _forms(source) for g in char_ngrams(form, n)}
    total = hits = 0
    for form in _forms(target):
        for g in char_ngrams(form, n):
            total += 1
            hits += g in source_grams
    return hits / total if total else 0.0
