"""Arc-hybrid transitions with SWAP, a static oracle and transition costs.

The stack starts as ``[0]`` (the artificial root) and the buffer as
``[1..n]``. A RIGHT_ARC from the root is only allowed as the final
transition, so every derivation attaches exactly one token to the root.
SWAP moves ``s0`` back into the buffer behind ``b0`` and is only allowed
for ``s0 < b0`` in the input order, which bounds the number of swaps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .conllu import Sentence

SHIFT = "SHIFT"
LEFT_ARC = "LEFT_ARC"
RIGHT_ARC = "RIGHT_ARC"
SWAP = "SWAP"
KINDS = (SHIFT, LEFT_ARC, RIGHT_ARC, SWAP)
INF = math.inf


class Transition(NamedTuple):
    kind: str
    label: Optional[str] = None

    def __str__(self) -> str:
        return self.kind if self.label is None else f"{self.kind}({self.label})"


@dataclass(frozen=True)
class ParseState:
    stack: tuple[int, ...]
    buffer: tuple[int, ...]
    arcs: frozenset = field(default_factory=frozenset)  # (head, dependent, label)
    swaps: int = 0

    @classmethod
    def initial(cls, n: int) -> "ParseState":
        return cls((0,), tuple(range(1, n + 1)))

    @property
    def terminal(self) -> bool:
        return not self.buffer and self.stack == (0,)

    def heads(self, n: int) -> list[Optional[int]]:
        out: list[Optional[int]] = [None] * (n + 1)
        for h, d, _ in self.arcs:
            out[d] = h
        return out

    def __str__(self) -> str:
        return f"stack={list(self.stack)} buffer={list(self.buffer)} arcs={sorted(self.arcs)}"


@dataclass(frozen=True)
class OracleMode:
    kind: str = "static_dynamic"
    exploration_prob: float = 0.1
    exploration_from_epoch: int = 2

    def __post_init__(self):
        if self.kind not in ("static", "static_dynamic"):
            raise ValueError(f"unknown oracle kind {self.kind!r}")
        if not 0.0 <= self.exploration_prob <= 1.0:
            raise ValueError("exploration_prob must be in [0, 1]")


class IllegalTransition(ValueError):
    pass


def swap_budget(n: int) -> int:
    return n * (n - 1) // 2


def projective_order(heads: Sequence[int]) -> list[int]:
    """Position of each node (0..n) in the in-order traversal of the tree.

    Left dependents come before their head and right dependents after it,
    each side in input order. Sorting tokens by this order makes any tree
    projective.
    """
    n = len(heads)
    kids: list[list[int]] = [[] for _ in range(n + 1)]
    for d, h in enumerate(heads, start=1):
        kids[h].append(d)
    order = [0] * (n + 1)
    pos = 0
    todo: list[tuple[int, bool]] = [(0, False)]
    while todo:
        node, expanded = todo.pop()
        if expanded:
            order[node] = pos
            pos += 1
            continue
        left = [k for k in kids[node] if k < node]
        right = [k for k in kids[node] if k > node]
        for k in reversed(right):
            todo.append((k, False))
        todo.append((node, True))
        for k in reversed(left):
            todo.append((k, False))
    return order


def legal_kinds(
    st: ParseState,
    n: int,
    proj: Optional[Sequence[int]] = None,
    budget: Optional[int] = None,
) -> set[str]:
    """Transition kinds allowed in ``st``.

    With a projective order (gold trees) SWAP needs ``s0`` to come after
    ``b0`` in that order; without one SWAP is only bounded by the swap
    budget, ``n(n-1)/2`` by default.
    """
    stack, buffer = st.stack, st.buffer
    out = set()
    s0 = stack[-1] if stack else None
    if buffer:
        out.add(SHIFT)
        if s0 not in (None, 0):
            out.add(LEFT_ARC)
            b0 = buffer[0]
            if s0 < b0:
                if proj is not None:
                    if proj[s0] > proj[b0]:
                        out.add(SWAP)
                elif st.swaps < (swap_budget(n) if budget is None else budget):
                    out.add(SWAP)
    if len(stack) >= 2 and s0 != 0 and (stack[-2] != 0 or not buffer):
        out.add(RIGHT_ARC)
    return out


legal_transitions = legal_kinds


def apply_transition(st: ParseState, t: Transition, n: Optional[int] = None, check: bool = True) -> ParseState:
    kind = t.kind
    if check:
        size = n if n is not None else len(st.stack) + len(st.buffer) + len(st.arcs) - 1
        if kind not in legal_kinds(st, size, budget=INF):
            raise IllegalTransition(f"{t} is not legal in {st}")
    stack, buffer = st.stack, st.buffer
    if kind == SHIFT:
        return ParseState(stack + (buffer[0],), buffer[1:], st.arcs, st.swaps)
    if kind == LEFT_ARC:
        return ParseState(stack[:-1], buffer, st.arcs | {(buffer[0], stack[-1], t.label)}, st.swaps)
    if kind == RIGHT_ARC:
        return ParseState(stack[:-1], buffer, st.arcs | {(stack[-2], stack[-1], t.label)}, st.swaps)
    if kind == SWAP:
        return ParseState(stack[:-1], buffer[:1] + (stack[-1],) + buffer[1:], st.arcs, st.swaps + 1)
    raise IllegalTransition(f"unknown transition kind {kind!r}")


class GoldTree:
    """Gold heads and labels indexed by token id (index 0 unused)."""

    __slots__ = ("n", "heads", "labels", "proj", "children")

    def __init__(self, heads: Sequence[int], labels: Sequence[str]):
        self.n = len(heads)
        self.heads = [-1] + list(heads)
        self.labels = [None] + list(labels)
        self.proj = projective_order(heads)
        self.children: list[list[int]] = [[] for _ in range(self.n + 1)]
        for d, h in enumerate(heads, start=1):
            self.children[h].append(d)

    @classmethod
    def from_sentence(cls, s: Sentence) -> "GoldTree":
        return cls(s.heads, s.deprels)

    def arcs(self) -> set:
        return {(self.heads[d], d, self.labels[d]) for d in range(1, self.n + 1)}

    def pending(self, node: int, remaining: set) -> int:
        return sum(1 for k in self.children[node] if k in remaining)


def static_next(st: ParseState, gold: GoldTree, remaining: Optional[set] = None) -> Transition:
    """The static oracle's choice: LEFT_ARC > RIGHT_ARC > SWAP > SHIFT."""
    stack, buffer = st.stack, st.buffer
    if remaining is None:
        remaining = set(stack) | set(buffer)
    s0 = stack[-1]
    if s0 != 0:
        complete = gold.pending(s0, remaining) == 0
        if buffer and complete and gold.heads[s0] == buffer[0]:
            return Transition(LEFT_ARC, gold.labels[s0])
        if (
            len(stack) >= 2
            and complete
            and gold.heads[s0] == stack[-2]
            and (stack[-2] != 0 or not buffer)
        ):
            return Transition(RIGHT_ARC, gold.labels[s0])
        if buffer and gold.proj[s0] > gold.proj[buffer[0]] and s0 < buffer[0]:
            return Transition(SWAP)
    return Transition(SHIFT)


def reordering_pending(st: ParseState, gold: GoldTree) -> bool:
    """True when ``b0`` is out of projective order with its neighbourhood.

    That is, some stack token follows ``b0`` in the projective order, or
    ``b0`` follows a later buffer token (so it will be shifted only to be
    swapped back).
    """
    if not st.buffer:
        return False
    proj = gold.proj
    p = proj[st.buffer[0]]
    return any(proj[x] > p for x in st.stack[1:]) or any(proj[x] < p for x in st.buffer[1:])


def static_oracle(s: Sentence | GoldTree) -> list[Transition]:
    gold = s if isinstance(s, GoldTree) else GoldTree.from_sentence(s)
    st = ParseState.initial(gold.n)
    seq = []
    limit = 2 * gold.n + swap_budget(gold.n) + 1
    while not st.terminal:
        t = static_next(st, gold)
        st = apply_transition(st, t, gold.n, check=False)
        seq.append(t)
        if len(seq) > limit:
            raise RuntimeError("static oracle failed to terminate")
    return seq


def reconstruct(seq: Sequence[Transition], n: int) -> set:
    """Arcs produced by ``seq`` from the initial state of an n-token sentence."""
    st = ParseState.initial(n)
    for i, t in enumerate(seq):
        if t.kind not in legal_kinds(st, n, budget=INF):
            raise IllegalTransition(f"transition {i} ({t}) is not legal in {st}")
        st = apply_transition(st, t, n, check=False)
    if not st.terminal:
        raise IllegalTransition(f"sequence ends in non-terminal state {st}")
    return set(st.arcs)


def dynamic_costs(st: ParseState, gold: GoldTree | Sentence, labels: Sequence[str] = ()) -> dict:
    """Cost of each legal transition from ``st``.

    Away from pending reorderings, SHIFT, LEFT_ARC and RIGHT_ARC cost the
    number of gold arcs that can no longer be built once the transition is
    taken. While ``b0`` is out of projective order with the stack or the
    rest of the buffer (see :func:`reordering_pending`) supervision is
    static: the static oracle's transition costs 0 and everything else is
    ruled out with an infinite cost. SWAP is never dynamic; outside those
    states it is infinite.

    Returns ``{Transition: cost}``. Arc transitions are listed for every
    label in ``labels``, plus the gold label where it applies.
    """
    if not isinstance(gold, GoldTree):
        gold = GoldTree.from_sentence(gold)
    stack, buffer = st.stack, st.buffer
    kinds = legal_kinds(st, gold.n, budget=INF)
    heads = gold.heads
    costs: dict[Transition, float] = {}
    if reordering_pending(st, gold):
        for kind in kinds:
            if kind in (SHIFT, SWAP):
                costs[Transition(kind)] = INF
            else:
                _add_labeled(costs, kind, INF, False, None, labels)
        costs[static_next(st, gold)] = 0
        return costs

    s0 = stack[-1]
    if SHIFT in kinds:
        b0 = buffer[0]
        c = 0
        # b0 can still be attached only to s0 (by RIGHT_ARC) or the buffer
        c += sum(1 for h in stack[:-1] if heads[b0] == h)
        c += sum(1 for d in stack if d != 0 and heads[d] == b0)
        costs[Transition(SHIFT)] = c

    if LEFT_ARC in kinds:
        b0 = buffer[0]
        c = 0
        if len(stack) >= 2 and heads[s0] == stack[-2]:
            c += 1
        c += sum(1 for h in buffer[1:] if heads[s0] == h)
        c += sum(1 for d in buffer if heads[d] == s0)
        _add_labeled(costs, LEFT_ARC, c, heads[s0] == b0, gold.labels[s0], labels)

    if RIGHT_ARC in kinds:
        s1 = stack[-2]
        c = 0
        c += sum(1 for h in buffer if heads[s0] == h)
        c += sum(1 for d in buffer if heads[d] == s0)
        _add_labeled(costs, RIGHT_ARC, c, heads[s0] == s1, gold.labels[s0], labels)

    if SWAP in kinds:
        costs[Transition(SWAP)] = INF
    return costs


def _add_labeled(costs, kind, base, is_gold_arc, gold_label, labels):
    names = list(labels)
    if is_gold_arc and gold_label not in names:
        names.append(gold_label)
    if not names:
        names = [None]
    for lab in names:
        wrong_label = is_gold_arc and lab != gold_label
        costs[Transition(kind, lab)] = base + (1 if wrong_label else 0)
