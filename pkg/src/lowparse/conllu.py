"""CoNLL-U reading, writing and tree validation.

Only syntactic words take part in the tree. Multiword range lines
(``1-2``) and empty nodes (``5.1``) are kept verbatim as passthrough lines
anchored to the number of syntactic words that precede them, so a
parse/serialize round trip reproduces the file.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Literal, Optional, Sequence

__all__ = [
    "ConlluError",
    "Token",
    "Sentence",
    "Treebank",
    "ValidationReport",
    "canonical_feats",
    "parse_feats",
    "format_feats",
    "parse_conllu",
    "read_conllu",
    "serialize_conllu",
    "write_conllu",
    "validate_tree",
    "is_projective",
    "universal",
]

Feats = tuple[tuple[str, str], ...]


class ConlluError(ValueError):
    """Malformed CoNLL-U input; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)


def universal(deprel: str) -> str:
    """Strip a language-specific subtype: ``obl:tmod`` -> ``obl``."""
    return deprel.split(":", 1)[0]


def parse_feats(text: str | None) -> Feats:
    if text is None or text == "_" or text == "":
        return ()
    pairs = []
    for item in text.split("|"):
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"malformed feature {item!r}")
        pairs.append((key, value))
    return canonical_feats(pairs)


def canonical_feats(pairs: Iterable[tuple[str, str]]) -> Feats:
    return tuple(sorted(dict(pairs).items()))


def format_feats(feats: Feats) -> str:
    if not feats:
        return "_"
    return "|".join(f"{k}={v}" for k, v in feats)


def _opt(value: str) -> Optional[str]:
    return None if value == "_" else value


def _col(value: Optional[str]) -> str:
    return "_" if value is None else value


@dataclass(frozen=True)
class Token:
    id: int
    form: str
    lemma: Optional[str]
    upos: str
    xpos: Optional[str]
    feats: Feats
    head: int
    deprel: str
    deps: Optional[str] = None
    misc: Optional[str] = None

    def to_line(self) -> str:
        return "\t".join(
            [
                str(self.id),
                self.form,
                _col(self.lemma),
                self.upos,
                _col(self.xpos),
                format_feats(self.feats),
                str(self.head),
                self.deprel,
                _col(self.deps),
                _col(self.misc),
            ]
        )

    def replace(self, **changes) -> "Token":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = ()
    # (number of syntactic words before the line, raw line)
    multiword_spans: tuple[tuple[int, str], ...] = ()

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    @property
    def heads(self) -> tuple[int, ...]:
        return tuple(t.head for t in self.tokens)

    @property
    def deprels(self) -> tuple[str, ...]:
        return tuple(t.deprel for t in self.tokens)

    @property
    def forms(self) -> tuple[str, ...]:
        return tuple(t.form for t in self.tokens)

    @property
    def sent_id(self) -> Optional[str]:
        for line in self.comments:
            key, sep, value = line[1:].partition("=")
            if sep and key.strip() == "sent_id":
                return value.strip()
        return None

    @property
    def text(self) -> str:
        return " ".join(self.forms)

    def replace(self, **changes) -> "Sentence":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Treebank:
    sentences: tuple[Sentence, ...] = ()
    language: str = "und"

    def __post_init__(self):
        if not self.language:
            raise ValueError("treebank language must be non-empty")
        if not isinstance(self.sentences, tuple):
            object.__setattr__(self, "sentences", tuple(self.sentences))

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def __getitem__(self, i):
        return self.sentences[i]

    def replace(self, **changes) -> "Treebank":
        return dataclasses.replace(self, **changes)

    def sentence_ids(self) -> list[str]:
        """``sent_id`` comments, falling back to 1-based positions."""
        return [s.sent_id or str(i + 1) for i, s in enumerate(self.sentences)]


def _find_cycle(heads: Sequence[int]) -> Optional[list[int]]:
    """Return the token ids on a cycle of the head relation, if any.

    ``heads[i]`` is the head of token ``i + 1``; out-of-range heads are
    treated as dangling and ignored.
    """
    n = len(heads)
    state = [0] * (n + 1)  # 0 unseen, 1 on current path, 2 done
    for start in range(1, n + 1):
        path = []
        node = start
        while 1 <= node <= n and state[node] == 0:
            state[node] = 1
            path.append(node)
            node = heads[node - 1]
        if 1 <= node <= n and state[node] == 1:
            return path[path.index(node):]
        for p in path:
            state[p] = 2
    return None


def _parse_token(cols: list[str], lineno: int) -> Token:
    try:
        tid = int(cols[0])
    except ValueError:
        raise ConlluError(f"non-integer id {cols[0]!r}", lineno) from None
    try:
        head = int(cols[6])
    except ValueError:
        raise ConlluError(f"non-integer head {cols[6]!r}", lineno) from None
    if tid < 1:
        raise ConlluError(f"id must be positive, got {tid}", lineno)
    if head < 0:
        raise ConlluError(f"head must be non-negative, got {head}", lineno)
    if head == tid:
        raise ConlluError("self-loop", lineno)
    try:
        feats = parse_feats(cols[5])
    except ValueError as exc:
        raise ConlluError(str(exc), lineno) from None
    return Token(
        id=tid,
        form=cols[1],
        lemma=_opt(cols[2]),
        upos=cols[3],
        xpos=_opt(cols[4]),
        feats=feats,
        head=head,
        deprel=cols[7],
        deps=_opt(cols[8]),
        misc=_opt(cols[9]),
    )


def _build_sentence(block: list[tuple[int, str]]) -> Sentence:
    comments: list[str] = []
    tokens: list[Token] = []
    token_lines: list[int] = []
    passthrough: list[tuple[int, str]] = []
    for lineno, line in block:
        if line.startswith("#"):
            if tokens or passthrough:
                raise ConlluError("comment after token lines", lineno)
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluError(f"expected 10 columns, found {len(cols)}", lineno)
        if "-" in cols[0] or "." in cols[0]:
            passthrough.append((len(tokens), line))
            continue
        tok = _parse_token(cols, lineno)
        if tok.id != len(tokens) + 1:
            kind = "duplicate" if tok.id <= len(tokens) else "gapped"
            raise ConlluError(
                f"{kind} id {tok.id}, expected {len(tokens) + 1}", lineno
            )
        tokens.append(tok)
        token_lines.append(lineno)
    if not tokens:
        raise ConlluError("sentence without syntactic words", block[0][0])
    n = len(tokens)
    for tok, lineno in zip(tokens, token_lines):
        if tok.head > n:
            raise ConlluError(f"head {tok.head} out of range 0..{n}", lineno)
    cycle = _find_cycle([t.head for t in tokens])
    if cycle is not None:
        raise ConlluError(
            f"cycle through tokens {cycle}", token_lines[cycle[0] - 1]
        )
    return Sentence(tuple(tokens), tuple(comments), tuple(passthrough))


def _blocks(text: str) -> Iterator[list[tuple[int, str]]]:
    block: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if line.strip() == "":
            if block:
                yield block
                block = []
            continue
        block.append((lineno, line))
    if block:
        yield block


def parse_conllu(
    text: str,
    language: str = "und",
    on_error: Literal["raise", "skip"] = "raise",
    errors: Optional[list[ConlluError]] = None,
) -> Treebank:
    """Parse CoNLL-U text into a :class:`Treebank`.

    With ``on_error="skip"`` malformed sentences are dropped and the
    exceptions appended to ``errors`` when a list is given.
    """
    sentences = []
    for block in _blocks(text):
        try:
            sentences.append(_build_sentence(block))
        except ConlluError as exc:
            if on_error == "raise":
                raise
            if errors is not None:
                errors.append(exc)
    return Treebank(tuple(sentences), language)


def read_conllu(path, language: str = "und", on_error="raise", errors=None) -> Treebank:
    with open(path, encoding="utf-8") as fh:
        return parse_conllu(fh.read(), language, on_error=on_error, errors=errors)


def sentence_lines(sentence: Sentence) -> list[str]:
    lines = list(sentence.comments)
    spans = list(sentence.multiword_spans)
    k = 0
    for i, tok in enumerate(sentence.tokens):
        while k < len(spans) and spans[k][0] <= i:
            lines.append(spans[k][1])
            k += 1
        lines.append(tok.to_line())
    lines.extend(line for _, line in spans[k:])
    return lines


def serialize_conllu(tb: Treebank | Iterable[Sentence]) -> str:
    sentences = tb.sentences if isinstance(tb, Treebank) else tb
    return "".join("\n".join(sentence_lines(s)) + "\n\n" for s in sentences)


def write_conllu(tb: Treebank, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_conllu(tb))


@dataclass
class ValidationReport:
    issues: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return self.ok


def validate_tree(
    s: Sentence, level: Literal["structure", "convention"] = "structure"
) -> ValidationReport:
    """Check a sentence and return every violation found.

    ``structure`` covers the id sequence, head range, acyclicity and a
    single head-0 token. ``convention`` adds the UD rule that exactly the
    head-0 token carries the ``root`` label; a tree whose head-0 token has
    another label is reported as ``rootless``.
    """
    if level not in ("structure", "convention"):
        raise ValueError(f"unknown validation level {level!r}")
    issues = []
    n = len(s.tokens)
    if n == 0:
        issues.append("empty sentence")
        return ValidationReport(issues)
    for i, tok in enumerate(s.tokens, start=1):
        if tok.id != i:
            issues.append(f"id sequence: token {i} has id {tok.id}")
        if not 0 <= tok.head <= n:
            issues.append(f"head out of range: token {tok.id} -> {tok.head}")
        elif tok.head == tok.id:
            issues.append(f"self-loop at token {tok.id}")
    heads = [t.head for t in s.tokens]
    cycle = _find_cycle([h if h != i else -1 for i, h in enumerate(heads, 1)])
    if cycle is not None:
        issues.append(f"cycle: {'->'.join(map(str, cycle))}")
    roots = [t.id for t in s.tokens if t.head == 0]
    if not roots:
        issues.append("no head-0 token")
    elif len(roots) > 1:
        issues.append(f"multiple head-0 tokens: {roots}")
    if level == "convention":
        for tok in s.tokens:
            is_root_label = universal(tok.deprel) == "root"
            if tok.head == 0 and not is_root_label:
                issues.append(f"rootless: head-0 token {tok.id} labeled {tok.deprel!r}")
            elif tok.head != 0 and is_root_label:
                issues.append(f"root label on non-root token {tok.id}")
    return ValidationReport(issues)


def is_projective(s: Sentence | Sequence[int]) -> bool:
    """True iff no two arcs cross, the arc from the artificial root included.

    Accepts a sentence or a plain head sequence (``heads[i]`` is the head
    of token ``i + 1``).
    """
    heads = s.heads if isinstance(s, Sentence) else tuple(s)
    spans = sorted(
        (min(h, d), max(h, d)) for d, h in enumerate(heads, start=1)
    )
    # sweep by left end: an open span ending strictly inside the new one,
    # after its start, crosses it
    for i, (a, b) in enumerate(spans):
        for c, d in spans[i + 1:]:
            if c >= b:
                break
            if a < c < b < d:
                return False
    return True
