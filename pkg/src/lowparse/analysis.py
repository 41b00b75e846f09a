"""Diagnostic POS probing and cross-lingual nearest-neighbour analysis
over frozen token representations."""
from __future__ import annotations

import logging
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.neural_network import MLPClassifier
from sklearn.preprocessing import LabelEncoder
from sklearn.utils.validation import check_is_fitted

from .representations import Representations

log = logging.getLogger(__name__)

NEIGHBOR_TAGS = ("ADJ", "NOUN", "PRON", "VERB")


@dataclass
class ProbeReport:
    accuracy: float
    majority_baseline: float
    majority_tag: str
    # (tag, %dev, accuracy, dev count) ordered by %dev ascending
    per_tag: list = field(default_factory=list)
    unseen_tags: list = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"accuracy\t{100 * self.accuracy:.2f}",
            f"majority\t{100 * self.majority_baseline:.2f}\t{self.majority_tag}",
        ]
        if self.unseen_tags:
            lines.append("unseen_in_train\t" + ",".join(self.unseen_tags))
        lines += ["", "tag\t%dev\taccuracy\tcount"]
        for tag, share, acc, count in self.per_tag:
            lines.append(f"{tag}\t{share:.2f}\t{100 * acc:.2f}\t{count}")
        return "\n".join(lines) + "\n"


class POSProbe(ClassifierMixin, BaseEstimator):
    """One-hidden-layer feed-forward tagger trained on frozen vectors.

    Early stopping holds out 10% of the training vectors. When the
    training set is too small for that split (fewer than two examples per
    class in the held-out part is likely), early stopping is switched off
    rather than failing.
    """

    def __init__(self, hidden_dim=64, max_iter=500, validation_fraction=0.1, patience=50, seed=0):
        self.hidden_dim = hidden_dim
        self.max_iter = max_iter
        self.validation_fraction = validation_fraction
        self.patience = patience
        self.seed = seed

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2 or len(X) != len(y):
            raise ValueError("X must be 2-d with one row per label")
        counts = Counter(y.tolist())
        held_out = int(np.ceil(self.validation_fraction * len(y)))
        early = held_out >= 2 and len(counts) > 1 and held_out < len(y) - len(counts)
        self.encoder_ = LabelEncoder().fit(y)
        self.classes_ = self.encoder_.classes_
        if len(counts) == 1:
            self.constant_ = self.classes_[0]
            self.model_ = None
            return self
        self.constant_ = None
        self.model_ = MLPClassifier(
            hidden_layer_sizes=(self.hidden_dim,),
            early_stopping=early,
            validation_fraction=self.validation_fraction,
            n_iter_no_change=self.patience,
            max_iter=self.max_iter,
            random_state=self.seed,
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            self.model_.fit(X, self.encoder_.transform(y))
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        X = np.asarray(X, dtype=np.float64)
        if self.model_ is None:
            return np.full(len(X), self.constant_, dtype=self.classes_.dtype)
        return self.encoder_.inverse_transform(self.model_.predict(X))


def probe_pos(
    train: Representations,
    dev: Representations,
    hidden_dim: int = 64,
    seed: int = 0,
) -> ProbeReport:
    """Train a probe on ``train`` vectors and report accuracy on ``dev``."""
    if train.dim != dev.dim:
        raise ValueError(f"dimension mismatch: train {train.dim} vs dev {dev.dim}")
    if not len(train) or not len(dev):
        raise ValueError("probe needs non-empty train and dev representations")
    probe = POSProbe(hidden_dim=hidden_dim, seed=seed).fit(train.vectors, train.upos)
    pred = probe.predict(dev.vectors)
    gold = np.asarray(dev.upos)
    correct = pred == gold
    counts = Counter(dev.upos)
    seen = set(train.upos)
    unseen = sorted(t for t in counts if t not in seen)
    for tag in unseen:
        log.warning("tag %s occurs in dev but not in train", tag)
    majority_tag, majority_count = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
    per_tag = []
    for tag, count in sorted(counts.items(), key=lambda kv: (kv[1], kv[0])):
        mask = gold == tag
        per_tag.append((tag, 100.0 * count / len(dev), float(correct[mask].mean()), count))
    return ProbeReport(
        accuracy=float(correct.mean()),
        majority_baseline=majority_count / len(dev),
        majority_tag=majority_tag,
        per_tag=per_tag,
        unseen_tags=unseen,
    )


@dataclass
class NeighborReport:
    # per target token: (key, form, upos, [(source index, form, upos, cosine), ...])
    neighbors: list = field(default_factory=list)
    same_pos_at_1: dict = field(default_factory=dict)  # tag -> percentage
    tag_counts: dict = field(default_factory=dict)
    zero_norm_target: int = 0
    zero_norm_source: int = 0

    def to_text(self) -> str:
        lines = ["tag\tsame_pos_at_1\tcount"]
        for tag, pct in self.same_pos_at_1.items():
            lines.append(f"{tag}\t{pct:.2f}\t{self.tag_counts[tag]}")
        lines.append(f"zero_norm\ttarget={self.zero_norm_target}\tsource={self.zero_norm_source}")
        lines += ["", "sent_id\ttoken_id\tform\tupos\tneighbors"]
        for (sid, tid), form, upos, ranked in self.neighbors:
            cells = [f"{f}/{u}/{c:.4f}" for _, f, u, c in ranked]
            lines.append(f"{sid}\t{tid}\t{form}\t{upos}\t" + " ".join(cells))
        return "\n".join(lines) + "\n"


def _unit_rows(vectors: np.ndarray):
    norms = np.linalg.norm(vectors, axis=1)
    ok = norms > 0
    unit = np.zeros_like(vectors)
    unit[ok] = vectors[ok] / norms[ok, None]
    return unit, ok


def nearest_neighbors(
    target: Representations,
    source: Representations,
    k: int = 3,
    tags: Sequence[str] = NEIGHBOR_TAGS,
    target_mask: Optional[Sequence[bool]] = None,
) -> NeighborReport:
    """Top-``k`` source tokens by cosine similarity for each target token.

    Ties keep source corpus order. Zero-norm vectors have no direction,
    so they are dropped on both sides and counted in the report.
    ``target_mask`` restricts the target tokens (see ``head_win_filter``).
    """
    if target.dim != source.dim:
        raise ValueError(f"dimension mismatch: target {target.dim} vs source {source.dim}")
    if k < 1:
        raise ValueError("k must be >= 1")
    t_unit, t_ok = _unit_rows(target.vectors)
    s_unit, s_ok = _unit_rows(source.vectors)
    keep = t_ok.copy()
    if target_mask is not None:
        keep &= np.asarray(target_mask, dtype=bool)
    src_idx = np.flatnonzero(s_ok)
    report = NeighborReport(
        zero_norm_target=int((~t_ok).sum()), zero_norm_source=int((~s_ok).sum())
    )
    hits: Counter = Counter()
    totals: Counter = Counter()
    sims_all = t_unit[keep] @ s_unit[src_idx].T if len(src_idx) else None
    for row, i in enumerate(np.flatnonzero(keep)):
        if sims_all is None:
            ranked = []
        else:
            sims = sims_all[row]
            # stable sort on -similarity keeps corpus order among ties
            order = np.argsort(-sims, kind="stable")[:k]
            ranked = [
                (int(src_idx[j]), source.forms[src_idx[j]], source.upos[src_idx[j]], float(sims[j]))
                for j in order
            ]
        report.neighbors.append((target.keys[i], target.forms[i], target.upos[i], ranked))
        tag = target.upos[i]
        if tag in tags:
            totals[tag] += 1
            hits[tag] += bool(ranked) and ranked[0][2] == tag
    for tag in tags:
        if totals[tag]:
            report.same_pos_at_1[tag] = 100.0 * hits[tag] / totals[tag]
            report.tag_counts[tag] = totals[tag]
    return report


def mask_from_keys(reps: Representations, keys) -> np.ndarray:
    wanted = set(keys)
    return np.array([k in wanted for k in reps.keys], dtype=bool)
