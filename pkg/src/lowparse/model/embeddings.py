"""Pre-trained word vectors in word2vec text format."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..translit import TranslitTable, transliterate_text

log = logging.getLogger(__name__)


@dataclass
class EmbeddingTable:
    words: list[str] = field(default_factory=list)
    vectors: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    skipped: int = 0

    def __post_init__(self):
        self.index = {w: i for i, w in enumerate(self.words)}

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def __getitem__(self, word: str) -> np.ndarray:
        return self.vectors[self.index[word]]


def read_word2vec_text(path, translit: Optional[TranslitTable] = None):
    """Return ``(dim, [(word, vector), ...], malformed_line_count)``."""
    with open(path, encoding="utf-8", errors="replace") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected a 'count dim' header line")
        dim = int(header[1])
        entries, skipped = [], 0
        for line in fh:
            parts = line.rstrip("\n").rstrip(" ").split(" ")
            if len(parts) != dim + 1 or not parts[0]:
                skipped += 1
                continue
            try:
                vec = np.asarray(parts[1:], dtype=np.float64)
            except ValueError:
                skipped += 1
                continue
            word = parts[0] if translit is None else transliterate_text(parts[0], translit)
            entries.append((word, vec))
    return dim, entries, skipped


def load_external_embeddings(
    files: Sequence, translit_table: Optional[TranslitTable] = None
) -> EmbeddingTable:
    """Merge vector files; on duplicate words the earliest file wins.

    Pass the source language's file first so shared words keep the source
    vector. With ``translit_table`` the keys are transliterated before the
    merge.
    """
    words: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    dim = None
    skipped = 0
    for path in files:
        file_dim, entries, bad = read_word2vec_text(path, translit_table)
        if dim is None:
            dim = file_dim
        elif file_dim != dim:
            raise ValueError(f"{path}: dimension {file_dim} differs from {dim}")
        skipped += bad
        for word, vec in entries:
            if word in seen:
                continue
            seen.add(word)
            words.append(word)
            rows.append(vec)
    if skipped:
        log.warning("skipped %d malformed embedding lines", skipped)
    vectors = np.vstack(rows) if rows else np.zeros((0, dim or 0))
    return EmbeddingTable(words, vectors, skipped)


def write_word2vec_text(table: EmbeddingTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table)} {table.dim}\n")
        for word, vec in zip(table.words, table.vectors):
            fh.write(word + " " + " ".join(f"{v:.6g}" for v in vec) + "\n")
