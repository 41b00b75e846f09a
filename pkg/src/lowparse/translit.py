"""Rule-based transliteration into a shared pivot alphabet.

Tables are TSV files, one ``source<TAB>replacement`` rule per line, ``#``
starting a comment line. Rules apply greedily left to right, longest
source first.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Iterable

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .conllu import Treebank
from .validation import check_treebank

TRANSLIT_FIELDS = ("form", "lemma")


@dataclass(frozen=True)
class TranslitTable:
    rules: tuple[tuple[str, str], ...] = ()
    name: str = "custom"

    def __post_init__(self):
        seen = set()
        for src, _ in self.rules:
            if not src:
                raise ValueError("transliteration rule with empty source")
            if src in seen:
                raise ValueError(f"duplicate transliteration source {src!r}")
            seen.add(src)
        ordered = tuple(sorted(self.rules, key=lambda r: (-len(r[0]), r[0])))
        object.__setattr__(self, "rules", ordered)
        object.__setattr__(self, "_lookup", dict(ordered))
        object.__setattr__(
            self, "_lengths", tuple(sorted({len(s) for s, _ in ordered}, reverse=True))
        )

    def __len__(self) -> int:
        return len(self.rules)

    def __call__(self, text: str) -> str:
        return transliterate_text(text, self)

    @classmethod
    def from_lines(cls, lines: Iterable[str], name: str = "custom") -> "TranslitTable":
        rules = []
        for lineno, raw in enumerate(lines, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            src, sep, dst = line.partition("\t")
            if not sep:
                raise ValueError(f"line {lineno}: expected source<TAB>replacement")
            if src in (r[0] for r in rules):
                raise ValueError(f"line {lineno}: duplicate source {src!r}")
            rules.append((src, dst))
        return cls(tuple(rules), name)


def load_table(path, name: str | None = None) -> TranslitTable:
    with open(path, encoding="utf-8") as fh:
        return TranslitTable.from_lines(fh, name or str(path))


def builtin_tables() -> dict[str, TranslitTable]:
    tables = {}
    for name in ("turkish_fold", "kazakh_cyr_lat"):
        text = resources.files("lowparse.data").joinpath(f"translit/{name}.tsv").read_text("utf-8")
        tables[name] = TranslitTable.from_lines(text.splitlines(), name)
    return tables


def get_table(name_or_path: str) -> TranslitTable:
    tables = builtin_tables()
    if name_or_path in tables:
        return tables[name_or_path]
    return load_table(name_or_path)


def _upper_first(s: str) -> str:
    return s[:1].upper() + s[1:]


def transliterate_text(text: str, table: TranslitTable) -> str:
    """Rewrite ``text`` with ``table``.

    A cluster without its own uppercase rule falls back to the rule for
    its lowercase form, with the replacement capitalised.
    """
    lookup = table._lookup
    if not lookup:
        return text
    out = []
    i, n = 0, len(text)
    while i < n:
        for length in table._lengths:
            chunk = text[i:i + length]
            if len(chunk) < length:
                continue
            if chunk in lookup:
                out.append(lookup[chunk])
                break
            folded = chunk.lower()
            if folded != chunk and len(folded) == length and folded in lookup:
                out.append(_upper_first(lookup[folded]))
                break
        else:
            out.append(text[i])
            length = 1
        i += length
    return "".join(out)


def transliterate_treebank(
    tb: Treebank, table: TranslitTable, fields: Iterable[str] = TRANSLIT_FIELDS
) -> Treebank:
    fields = tuple(fields)
    bad = set(fields) - set(TRANSLIT_FIELDS)
    if bad:
        raise ValueError(f"can only transliterate {TRANSLIT_FIELDS}, got {sorted(bad)}")
    sentences = []
    for s in tb:
        tokens = []
        for t in s.tokens:
            changes = {}
            if "form" in fields:
                changes["form"] = transliterate_text(t.form, table)
            if "lemma" in fields and t.lemma is not None:
                changes["lemma"] = transliterate_text(t.lemma, table)
            tokens.append(t.replace(**changes))
        sentences.append(s.replace(tokens=tuple(tokens)))
    return tb.replace(sentences=tuple(sentences))


class Transliterator(TransformerMixin, BaseEstimator):
    """``table`` is a builtin table name, a TSV path or a :class:`TranslitTable`."""

    def __init__(self, table="turkish_fold", fields=TRANSLIT_FIELDS):
        self.table = table
        self.fields = fields

    def fit(self, X=None, y=None):
        self.table_ = self.table if isinstance(self.table, TranslitTable) else get_table(self.table)
        return self

    def transform(self, X):
        check_is_fitted(self, "table_")
        if isinstance(X, str):
            return transliterate_text(X, self.table_)
        return transliterate_treebank(check_treebank(X), self.table_, self.fields)
