"""Input checks shared by the estimators, in the spirit of sklearn's
``check_array``: accept what can be coerced, raise ``TypeError`` or
``ValueError`` with a readable message otherwise."""
from __future__ import annotations

from typing import Iterable

from .conllu import Sentence, Treebank, validate_tree


def check_treebank(X, language: str | None = None, require_valid: bool = False) -> Treebank:
    if isinstance(X, Treebank):
        tb = X
    elif isinstance(X, Sentence):
        tb = Treebank((X,), language or "und")
    elif isinstance(X, Iterable) and not isinstance(X, (str, bytes)):
        sentences = tuple(X)
        if not all(isinstance(s, Sentence) for s in sentences):
            raise TypeError("expected a Treebank or an iterable of Sentence objects")
        tb = Treebank(sentences, language or "und")
    else:
        raise TypeError(f"expected a Treebank, got {type(X).__name__}")
    if require_valid:
        for i, s in enumerate(tb.sentences, start=1):
            report = validate_tree(s)
            if not report.ok:
                raise ValueError(f"sentence {i} is not a well-formed tree: {report.issues[0]}")
    return tb


def check_treebanks(X) -> list[Treebank]:
    """A single treebank or a list of them (one per language)."""
    if isinstance(X, (Treebank, Sentence)):
        return [check_treebank(X)]
    tbs = list(X)
    if tbs and all(isinstance(t, Treebank) for t in tbs):
        return tbs
    return [check_treebank(tbs)]


def check_aligned(gold: Treebank, pred: Treebank) -> None:
    if len(gold) != len(pred):
        raise ValueError(f"sentence count mismatch: gold {len(gold)} vs predicted {len(pred)}")
    for i, (g, p) in enumerate(zip(gold, pred), start=1):
        if len(g) != len(p):
            raise ValueError(
                f"token count mismatch in sentence {i}: gold {len(g)} vs predicted {len(p)}"
            )
