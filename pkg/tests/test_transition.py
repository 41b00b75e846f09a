import itertools

import pytest

from lowparse.conllu import is_projective, parse_conllu
from lowparse.transition import (
    INF,
    LEFT_ARC,
    RIGHT_ARC,
    SHIFT,
    SWAP,
    GoldTree,
    IllegalTransition,
    OracleMode,
    ParseState,
    Transition,
    apply_transition,
    dynamic_costs,
    legal_kinds,
    projective_order,
    reconstruct,
    static_oracle,
    swap_budget,
)
from oracle_bruteforce import all_trees, check_tree
from treegen import random_corpus

LETTER = (
    "1\tShe\t_\tPRON\t_\t_\t2\tnsubj\t_\t_\n"
    "2\twrote\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
    "3\tme\t_\tPRON\t_\t_\t2\tiobj\t_\t_\n"
    "4\ta\t_\tDET\t_\t_\t5\tdet\t_\t_\n"
    "5\tletter\t_\tNOUN\t_\t_\t2\tobj\t_\t_\n\n"
)


def st(stack, buffer, arcs=()):
    return ParseState(tuple(stack), tuple(buffer), frozenset(arcs))


def test_initial_state_only_shift():
    assert legal_kinds(ParseState.initial(3), 3) == {SHIFT}


def test_stack_root_plus_one():
    # the root may only take its dependent once the buffer is empty
    assert legal_kinds(st([0, 1], [2, 3]), 3) == {SHIFT, LEFT_ARC, SWAP}
    assert legal_kinds(st([0, 1], []), 1) == {RIGHT_ARC}
    assert legal_kinds(st([0, 1, 2], [3]), 3) == {SHIFT, LEFT_ARC, RIGHT_ARC, SWAP}


def test_terminal_state_has_no_moves():
    s = st([0], [])
    assert s.terminal and legal_kinds(s, 2) == set()


def test_swap_needs_inverted_projective_order():
    # 3 -> 1 spans the root 2: in-order traversal gives 2, 1, 3
    proj = projective_order([3, 0, 2])
    assert proj == [0, 2, 1, 3]
    assert SWAP in legal_kinds(st([0, 1], [2, 3]), 3, proj)
    assert SWAP not in legal_kinds(st([0, 1], [2, 3]), 3, projective_order([2, 0, 2]))
    # never swap a later token back behind an earlier one
    assert SWAP not in legal_kinds(st([0, 3], [2]), 3)


def test_swap_budget():
    assert swap_budget(4) == 6
    s = ParseState((0, 1), (2,), frozenset(), swaps=1)
    assert SWAP not in legal_kinds(s, 2)
    assert SWAP in legal_kinds(s, 2, budget=2)


def test_apply_examples():
    assert apply_transition(st([0], [1, 2]), Transition(SHIFT)) == st([0, 1], [2])
    assert apply_transition(st([0, 1], [2]), Transition(LEFT_ARC, "nsubj")) == st(
        [0], [2], {(2, 1, "nsubj")}
    )
    swapped = apply_transition(st([0, 1, 2], [3]), Transition(SWAP), 3)
    assert (swapped.stack, swapped.buffer, swapped.swaps) == ((0, 1), (3, 2), 1)
    assert apply_transition(st([0, 1, 2], []), Transition(RIGHT_ARC, "obj"), 2).arcs == {
        (1, 2, "obj")
    }


def test_illegal_transition_rejected():
    with pytest.raises(IllegalTransition, match="stack=\\[0\\]"):
        apply_transition(ParseState.initial(2), Transition(LEFT_ARC, "x"))


def test_projective_order_sorts_into_projective_tree():
    for s in random_corpus(seed=12, count=300):
        proj = projective_order(s.heads)
        assert sorted(proj) == list(range(len(s) + 1))
        order = sorted(range(1, len(s) + 1), key=lambda i: proj[i])
        pos = {old: new for new, old in enumerate(order, 1)}
        pos[0] = 0
        heads = [0] * len(s)
        for old in order:
            heads[pos[old] - 1] = pos[s.heads[old - 1]]
        assert is_projective(heads)
        if is_projective(s):
            assert order == list(range(1, len(s) + 1))


def test_one_token_oracle():
    gold = GoldTree([0], ["root"])
    seq = static_oracle(gold)
    assert seq == [Transition(SHIFT), Transition(RIGHT_ARC, "root")]
    assert reconstruct(seq, 1) == {(0, 1, "root")}


def test_one_token_oracle_is_unique_short_sequence():
    # brute force over every sequence of length <= 4
    moves = [Transition(SHIFT), Transition(SWAP), Transition(LEFT_ARC, "root"),
             Transition(RIGHT_ARC, "root")]
    found = []
    for k in range(1, 5):
        for seq in itertools.product(moves, repeat=k):
            try:
                if reconstruct(seq, 1) == {(0, 1, "root")}:
                    found.append(list(seq))
            except IllegalTransition:
                pass
    assert found == [static_oracle(GoldTree([0], ["root"]))]


def test_letter_oracle():
    s = parse_conllu(LETTER)[0]
    seq = static_oracle(s)
    assert len(seq) == 10
    assert SWAP not in {t.kind for t in seq}
    assert reconstruct(seq, 5) == GoldTree.from_sentence(s).arcs()


def test_reconstruct_rejects_unfinished():
    with pytest.raises(IllegalTransition, match="non-terminal"):
        reconstruct([Transition(SHIFT)], 2)
    with pytest.raises(IllegalTransition, match="not legal"):
        reconstruct([Transition(RIGHT_ARC, "x")], 2)


def test_round_trip_on_random_corpus():
    tb = random_corpus(seed=0, count=1000)
    nonproj = 0
    for s in tb:
        seq = static_oracle(s)
        gold = GoldTree.from_sentence(s)
        assert reconstruct(seq, len(s)) == gold.arcs()
        swaps = sum(t.kind == SWAP for t in seq)
        assert sum(t.kind == SHIFT for t in seq) == len(s) + swaps
        assert sum(t.kind in (LEFT_ARC, RIGHT_ARC) for t in seq) == len(s)
        if is_projective(s):
            assert swaps == 0
        else:
            nonproj += 1
            assert swaps > 0
    assert nonproj >= 300


def test_dynamic_costs_simple_cases():
    gold = GoldTree([2, 0], ["nsubj", "root"])
    costs = dynamic_costs(st([0, 1], [2]), gold, ["nsubj", "obj", "root"])
    assert costs[Transition(LEFT_ARC, "nsubj")] == 0
    assert costs[Transition(LEFT_ARC, "obj")] == 1
    # shifting 2 strands 1 under it and buries the root arc of 2
    assert costs[Transition(SHIFT)] == 2
    end = dynamic_costs(st([0, 2], []), gold, ["root"])
    assert end == {Transition(RIGHT_ARC, "root"): 0}


def test_swap_never_dynamic():
    gold = GoldTree([0, 1, 1], ["root", "a", "b"])
    costs = dynamic_costs(st([0, 1, 2], [3]), gold, ["a", "b"])
    assert costs[Transition(SWAP)] == INF


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_dynamic_costs_exact_against_brute_force(n):
    for heads in all_trees(n):
        assert check_tree(heads, exact_costs=True) == []


@pytest.mark.slow
def test_dynamic_costs_exact_n6():
    for heads in all_trees(6):
        assert check_tree(heads, exact_costs=True) == []


def test_oracle_mode_validation():
    assert OracleMode().kind == "static_dynamic"
    with pytest.raises(ValueError):
        OracleMode(kind="dynamic")
    with pytest.raises(ValueError):
        OracleMode(exploration_prob=2.0)
