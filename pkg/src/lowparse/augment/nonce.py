"""Nonce sentences: swap content words for others with identical syntax.

A replacement must share UPOS, morphological features and the universal
dependency label with the word it replaces, so the tree is left intact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..conllu import Sentence, Treebank, universal
from ..rng import stream
from ..validation import check_treebank

CONTENT_POS = frozenset({"NOUN", "VERB", "ADJ"})


class LexSignature(NamedTuple):
    upos: str
    feats: tuple
    deprel_universal: str


@dataclass(frozen=True)
class NonceConfig:
    p_replace: float = 0.5
    copies: int = 5
    content_pos: frozenset = CONTENT_POS
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_replace <= 1.0:
            raise ValueError(f"p_replace must be in [0, 1], got {self.p_replace}")
        if self.copies < 1:
            raise ValueError("copies must be >= 1")
        object.__setattr__(self, "content_pos", frozenset(self.content_pos))


@dataclass
class LexiconIndex:
    """Signature -> distinct (form, lemma) types, in first-seen order."""

    entries: dict = field(default_factory=dict)

    def add(self, sig: LexSignature, form: str, lemma) -> None:
        types = self.entries.setdefault(sig, [])
        if (form, lemma) not in types:
            types.append((form, lemma))

    def __getitem__(self, sig: LexSignature) -> list:
        return self.entries.get(sig, [])

    def __len__(self) -> int:
        return len(self.entries)


def signature(token) -> LexSignature:
    return LexSignature(token.upos, token.feats, universal(token.deprel))


def build_lexicon_index(tb: Treebank, cfg: NonceConfig = NonceConfig()) -> LexiconIndex:
    idx = LexiconIndex()
    for s in tb:
        for t in s.tokens:
            if t.upos in cfg.content_pos:
                idx.add(signature(t), t.form, t.lemma)
    return idx


def nonce_sentence(
    s: Sentence, idx: LexiconIndex, cfg: NonceConfig, rng: np.random.Generator
) -> Sentence:
    tokens = list(s.tokens)
    for i, tok in enumerate(tokens):
        if tok.upos not in cfg.content_pos:
            continue
        if rng.random() >= cfg.p_replace:
            continue
        options = [ty for ty in idx[signature(tok)] if ty[0] != tok.form]
        if not options:
            continue
        form, lemma = options[int(rng.integers(len(options)))]
        tokens[i] = tok.replace(form=form, lemma=lemma)
    # range lines would no longer match the surface forms
    return Sentence(tuple(tokens), s.comments)


def nonce_augment(tb: Treebank, idx: LexiconIndex, cfg: NonceConfig) -> Treebank:
    added = []
    for i, (s, sid) in enumerate(zip(tb.sentences, tb.sentence_ids())):
        rng = stream(cfg.seed, "nonce", i)
        for k in range(1, cfg.copies + 1):
            new = nonce_sentence(s, idx, cfg, rng)
            added.append(
                new.replace(
                    comments=(
                        f"# sent_id = {sid}-nonce{k}",
                        f"# augmented = nonce source = {sid}",
                        f"# text = {new.text}",
                    )
                )
            )
    return tb.replace(sentences=tb.sentences + tuple(added))


class NonceAugmenter(TransformerMixin, BaseEstimator):
    """Learns a lexicon index in ``fit``; ``transform`` appends nonce copies.

    Fitting on one treebank and transforming another lets replacements be
    drawn from a larger vocabulary than the sentences being augmented.
    """

    def __init__(self, p_replace=0.5, copies=5, content_pos=("NOUN", "VERB", "ADJ"), seed=0):
        self.p_replace = p_replace
        self.copies = copies
        self.content_pos = content_pos
        self.seed = seed

    def fit(self, X, y=None):
        tb = check_treebank(X)
        self.config_ = NonceConfig(self.p_replace, self.copies, frozenset(self.content_pos), self.seed)
        self.index_ = build_lexicon_index(tb, self.config_)
        return self

    def transform(self, X):
        check_is_fitted(self, "index_")
        return nonce_augment(check_treebank(X), self.index_, self.config_)
