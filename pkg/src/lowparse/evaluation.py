"""Attachment scores, rootless-tree rate and confusion-matrix differences."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .conllu import Treebank, universal
from .validation import check_aligned

INCORRECT_HEAD = "incorrect head"


@dataclass
class EvalReport:
    las: float
    uas: float
    # label -> (correct head and label, gold count, predicted count)
    per_label: dict = field(default_factory=dict)
    rootless_rate: float = 0.0
    token_count: int = 0
    sentence_count: int = 0

    def to_text(self) -> str:
        lines = [
            f"tokens\t{self.token_count}",
            f"sentences\t{self.sentence_count}",
            f"LAS\t{100 * self.las:.2f}",
            f"UAS\t{100 * self.uas:.2f}",
            f"rootless\t{100 * self.rootless_rate:.2f}",
            "",
            "label\tcorrect\tgold\tpredicted\trecall\tprecision",
        ]
        for label in sorted(self.per_label):
            correct, gold, pred = self.per_label[label]
            rec = 100 * correct / gold if gold else 0.0
            prec = 100 * correct / pred if pred else 0.0
            lines.append(f"{label}\t{correct}\t{gold}\t{pred}\t{rec:.2f}\t{prec:.2f}")
        return "\n".join(lines) + "\n"


def _label(deprel: str, strip_subtypes: bool) -> str:
    return universal(deprel) if strip_subtypes else deprel


def is_rootless(sentence) -> bool:
    return not any(t.head == 0 and universal(t.deprel) == "root" for t in sentence.tokens)


def score(
    gold: Treebank,
    pred: Treebank,
    strip_subtypes: bool = True,
    include_punct: bool = True,
) -> EvalReport:
    """LAS and UAS of ``pred`` against ``gold``.

    Labels are compared on their universal part unless ``strip_subtypes``
    is off; with ``include_punct`` off, gold PUNCT tokens are skipped.
    """
    check_aligned(gold, pred)
    total = heads_ok = both_ok = 0
    per_label: dict[str, list[int]] = {}
    rootless = 0
    for g_sent, p_sent in zip(gold, pred):
        rootless += is_rootless(p_sent)
        for g, p in zip(g_sent.tokens, p_sent.tokens):
            if not include_punct and g.upos == "PUNCT":
                continue
            gl = _label(g.deprel, strip_subtypes)
            pl = _label(p.deprel, strip_subtypes)
            total += 1
            per_label.setdefault(gl, [0, 0, 0])[1] += 1
            per_label.setdefault(pl, [0, 0, 0])[2] += 1
            if g.head == p.head:
                heads_ok += 1
                if gl == pl:
                    both_ok += 1
                    per_label[gl][0] += 1
    n_sent = len(gold)
    return EvalReport(
        las=both_ok / total if total else 0.0,
        uas=heads_ok / total if total else 0.0,
        per_label={k: tuple(v) for k, v in per_label.items()},
        rootless_rate=rootless / n_sent if n_sent else 0.0,
        token_count=total,
        sentence_count=n_sent,
    )


def rootless_rate(tb: Treebank) -> float:
    return sum(map(is_rootless, tb)) / len(tb) if len(tb) else 0.0


def head_win_filter(gold: Treebank, pred_a: Treebank, pred_b: Treebank) -> set[tuple[int, int]]:
    """``(sentence index, token id)`` where A's head is right and B's wrong."""
    check_aligned(gold, pred_a)
    check_aligned(gold, pred_b)
    out = set()
    for i, (g, a, b) in enumerate(zip(gold, pred_a, pred_b)):
        for tg, ta, tb_ in zip(g.tokens, a.tokens, b.tokens):
            if ta.head == tg.head and tb_.head != tg.head:
                out.add((i, tg.id))
    return out


@dataclass
class ConfusionDiff:
    rows: list[str]
    columns: list[str]
    cells: np.ndarray  # A - B, percentage points
    matrix_a: np.ndarray
    matrix_b: np.ndarray
    omitted_rows: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["gold"] + self.columns)
        for name, row in zip(self.rows, self.cells):
            writer.writerow([name] + [f"{v:.4f}" for v in row])
        return buf.getvalue()


def _confusion(gold, pred, rows, col_index, group_of, strip):
    counts = np.zeros((len(rows), len(col_index)))
    row_index = {r: i for i, r in enumerate(rows)}
    for g_sent, p_sent in zip(gold, pred):
        for g, p in zip(g_sent.tokens, p_sent.tokens):
            r = row_index.get(group_of(_label(g.deprel, strip)))
            if r is None:
                continue
            if g.head != p.head:
                counts[r, col_index[INCORRECT_HEAD]] += 1
            else:
                counts[r, col_index[_label(p.deprel, strip)]] += 1
    totals = counts.sum(axis=1, keepdims=True)
    return 100.0 * counts / np.where(totals == 0, 1, totals)


def confusion_diff(
    gold: Treebank,
    pred_a: Treebank,
    pred_b: Treebank,
    label_groups: Optional[Mapping[str, str]] = None,
    strip_subtypes: bool = True,
) -> ConfusionDiff:
    """Row-normalised confusion matrix of A minus that of B.

    Rows are gold label groups (``label_groups`` maps a gold label to its
    group; unmapped labels form their own group). Columns are predicted
    labels when the head is right, then a final incorrect-head column.
    Groups without gold tokens are dropped and listed in ``omitted_rows``.
    """
    check_aligned(gold, pred_a)
    check_aligned(gold, pred_b)
    groups = dict(label_groups or {})

    def group_of(label):
        return groups.get(label, label)

    gold_counts: dict[str, int] = {}
    pred_labels = set()
    for tb in (gold, pred_a, pred_b):
        for s in tb:
            for t in s.tokens:
                lab = _label(t.deprel, strip_subtypes)
                if tb is gold:
                    g = group_of(lab)
                    gold_counts[g] = gold_counts.get(g, 0) + 1
                pred_labels.add(lab)
    declared = sorted(set(groups.values()) | set(gold_counts))
    rows = [g for g in declared if gold_counts.get(g)]
    omitted = [g for g in declared if not gold_counts.get(g)]
    columns = sorted(pred_labels) + [INCORRECT_HEAD]
    col_index = {c: i for i, c in enumerate(columns)}
    a = _confusion(gold, pred_a, rows, col_index, group_of, strip_subtypes)
    b = _confusion(gold, pred_b, rows, col_index, group_of, strip_subtypes)
    return ConfusionDiff(rows, columns, a - b, a, b, omitted)


def read_label_groups(path) -> dict[str, str]:
    """``label<TAB>group`` lines; ``#`` comments allowed."""
    groups = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            label, _, group = line.partition("\t")
            groups[label.strip()] = (group or label).strip()
    return groups
