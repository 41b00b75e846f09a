"""Per-token vector dumps shared by the parser and the analysis tools.

The on-disk format is TSV with a header line::

    sent_id  token_id  form  gold_upos  v1 ... vd

Values are written with 17 significant digits, so a dump read back
holds exactly the vectors that were written.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Representations:
    keys: list = field(default_factory=list)  # (sent_id, token_id)
    forms: list = field(default_factory=list)
    upos: list = field(default_factory=list)
    vectors: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d array")
        n = len(self.keys)
        if not (len(self.forms) == len(self.upos) == self.vectors.shape[0] == n):
            raise ValueError("keys, forms, upos and vectors must have the same length")

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def subset(self, mask) -> "Representations":
        idx = np.flatnonzero(np.asarray(mask, dtype=bool))
        return Representations(
            [self.keys[i] for i in idx],
            [self.forms[i] for i in idx],
            [self.upos[i] for i in idx],
            self.vectors[idx],
        )

    def to_tsv(self) -> str:
        lines = ["\t".join(["sent_id", "token_id", "form", "gold_upos"]
                           + [f"v{i}" for i in range(1, self.dim + 1)])]
        for (sid, tid), form, upos, vec in zip(self.keys, self.forms, self.upos, self.vectors):
            vals = "\t".join(f"{v:.17g}" for v in vec)
            lines.append(f"{sid}\t{tid}\t{form}\t{upos}\t{vals}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_tsv())

    @classmethod
    def from_tsv(cls, text: str) -> "Representations":
        lines = [ln for ln in text.split("\n") if ln]
        if not lines or not lines[0].startswith("sent_id\t"):
            raise ValueError("representation dump lacks the 'sent_id' header line")
        dim = len(lines[0].split("\t")) - 4
        keys, forms, upos, rows = [], [], [], []
        for lineno, line in enumerate(lines[1:], start=2):
            cols = line.split("\t")
            if len(cols) != dim + 4:
                raise ValueError(f"line {lineno}: expected {dim + 4} columns, got {len(cols)}")
            keys.append((cols[0], int(cols[1])))
            forms.append(cols[2])
            upos.append(cols[3])
            rows.append([float(v) for v in cols[4:]])
        vectors = np.array(rows, dtype=np.float64) if rows else np.zeros((0, dim))
        return cls(keys, forms, upos, vectors)

    @classmethod
    def read(cls, path) -> "Representations":
        with open(path, encoding="utf-8") as fh:
            return cls.from_tsv(fh.read())
