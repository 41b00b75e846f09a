"""Tree morphing: cropping and rotating the arguments of the root predicate."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..conllu import Sentence, Treebank, universal, validate_tree
from ..rng import stream
from ..validation import check_treebank

CORE_LABELS = frozenset({"nsubj", "obj", "iobj", "obl"})


@dataclass(frozen=True)
class MorphConfig:
    core_labels: frozenset = CORE_LABELS
    p_crop: float = 0.3
    p_rotate: float = 0.3
    max_crops_per_sentence: int = 3
    max_rotations_per_sentence: int = 3
    seed: int = 0

    def __post_init__(self):
        for name in ("p_crop", "p_rotate"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if self.max_crops_per_sentence < 0 or self.max_rotations_per_sentence < 0:
            raise ValueError("caps must be >= 0")
        object.__setattr__(self, "core_labels", frozenset(self.core_labels))


def reorder(s: Sentence, order: Sequence[int]) -> Sentence:
    """Keep the tokens with the given old ids, in the given order.

    Heads are remapped to the new positions. A kept token whose head was
    dropped would dangle; callers only drop whole subtrees.
    """
    new_id = {old: new for new, old in enumerate(order, start=1)}
    new_id[0] = 0
    tokens = tuple(
        s.tokens[old - 1].replace(id=new_id[old], head=new_id[s.tokens[old - 1].head])
        for old in order
    )
    return Sentence(tokens)


def _children(s: Sentence) -> dict[int, list[int]]:
    kids: dict[int, list[int]] = {i: [] for i in range(len(s) + 1)}
    for t in s.tokens:
        kids[t.head].append(t.id)
    return kids


def subtree(s: Sentence, node: int, kids=None) -> list[int]:
    kids = kids if kids is not None else _children(s)
    out, todo = [], [node]
    while todo:
        x = todo.pop()
        out.append(x)
        todo.extend(kids[x])
    return sorted(out)


def _root(s: Sentence) -> int:
    roots = [t.id for t in s.tokens if t.head == 0]
    if len(roots) != 1:
        raise ValueError(f"expected exactly one head-0 token, found {len(roots)}")
    return roots[0]


def core_dependents(s: Sentence, core_labels=CORE_LABELS) -> list[int]:
    root = _root(s)
    return [
        t.id for t in s.tokens
        if t.head == root and universal(t.deprel) in core_labels
    ]


def crop_candidates(s: Sentence, core_labels=CORE_LABELS) -> list[Sentence]:
    """Every crop that removes a non-empty proper subset of core subtrees.

    Ordered by subset size, then lexicographically by dependent id.
    """
    deps = core_dependents(s, core_labels)
    kids = _children(s)
    spans = {d: set(subtree(s, d, kids)) for d in deps}
    out = []
    for size in range(1, len(deps)):
        for removed in itertools.combinations(deps, size):
            drop = set().union(*(spans[d] for d in removed))
            out.append(reorder(s, [t.id for t in s.tokens if t.id not in drop]))
    return out


def rotation_blocks(s: Sentence, core_labels=CORE_LABELS) -> list[list[int]]:
    """Movable blocks in original order.

    Each core dependent with a contiguous subtree is its own block; the
    root and everything else form one block.
    """
    kids = _children(s)
    blocks = []
    for d in core_dependents(s, core_labels):
        span = subtree(s, d, kids)
        if span[-1] - span[0] + 1 == len(span):
            blocks.append(span)
    moved = {i for b in blocks for i in b}
    rest = [t.id for t in s.tokens if t.id not in moved]
    blocks.append(rest)
    return sorted(blocks, key=min)


def rotation_candidates(s: Sentence, core_labels=CORE_LABELS) -> list[Sentence]:
    blocks = rotation_blocks(s, core_labels)
    if len(blocks) < 2:
        return []
    out = []
    for perm in itertools.permutations(range(len(blocks))):
        if perm == tuple(range(len(blocks))):
            continue
        out.append(reorder(s, [i for b in perm for i in blocks[b]]))
    return out


def _sample(candidates: list[Sentence], p: float, cap: int, rng: np.random.Generator):
    if not candidates or cap == 0 or p == 0.0:
        return []
    kept = []
    for i in rng.permutation(len(candidates)):
        if rng.random() < p:
            kept.append(candidates[i])
            if len(kept) == cap:
                break
    return kept


def crop_sentence(s: Sentence, cfg: MorphConfig, rng: np.random.Generator) -> list[Sentence]:
    return _sample(crop_candidates(s, cfg.core_labels), cfg.p_crop, cfg.max_crops_per_sentence, rng)


def rotate_sentence(s: Sentence, cfg: MorphConfig, rng: np.random.Generator) -> list[Sentence]:
    return _sample(
        rotation_candidates(s, cfg.core_labels), cfg.p_rotate, cfg.max_rotations_per_sentence, rng
    )


def _with_provenance(s: Sentence, op: str, source_id: str, k: int) -> Sentence:
    comments = (
        f"# sent_id = {source_id}-{op}{k}",
        f"# augmented = morph:{op} source = {source_id}",
        f"# text = {s.text}",
    )
    return s.replace(comments=comments)


def morph_augment(tb: Treebank, cfg: MorphConfig) -> Treebank:
    """Originals followed by the sampled crops and rotations of each sentence."""
    added = []
    for i, (s, sid) in enumerate(zip(tb.sentences, tb.sentence_ids())):
        if not validate_tree(s):
            continue
        rng = stream(cfg.seed, "morph", i)
        crops = crop_sentence(s, cfg, rng)
        rotations = rotate_sentence(s, cfg, rng)
        added.extend(_with_provenance(c, "crop", sid, k) for k, c in enumerate(crops, 1))
        added.extend(_with_provenance(r, "rotate", sid, k) for k, r in enumerate(rotations, 1))
    return tb.replace(sentences=tb.sentences + tuple(added))


class MorphAugmenter(TransformerMixin, BaseEstimator):
    """Treebank transformer appending cropped and rotated copies."""

    def __init__(
        self,
        core_labels=("nsubj", "obj", "iobj", "obl"),
        p_crop=0.3,
        p_rotate=0.3,
        max_crops_per_sentence=3,
        max_rotations_per_sentence=3,
        seed=0,
    ):
        self.core_labels = core_labels
        self.p_crop = p_crop
        self.p_rotate = p_rotate
        self.max_crops_per_sentence = max_crops_per_sentence
        self.max_rotations_per_sentence = max_rotations_per_sentence
        self.seed = seed

    def fit(self, X, y=None):
        check_treebank(X)
        self.config_ = MorphConfig(
            frozenset(self.core_labels),
            self.p_crop,
            self.p_rotate,
            self.max_crops_per_sentence,
            self.max_rotations_per_sentence,
            self.seed,
        )
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        return morph_augment(check_treebank(X), self.config_)
