import itertools

import pytest
from hypothesis import given, settings

from lowparse.conllu import (
    ConlluError,
    Token,
    Treebank,
    canonical_feats,
    is_projective,
    parse_conllu,
    parse_feats,
    serialize_conllu,
    validate_tree,
)
from treegen import random_corpus, trees

LETTER = """# sent_id = letter
# text = She wrote me a letter
1\tShe\tshe\tPRON\t_\tCase=Nom|Number=Sing\t2\tnsubj\t_\t_
2\twrote\twrite\tVERB\t_\tTense=Past\t0\troot\t_\t_
3\tme\tI\tPRON\t_\tCase=Acc\t2\tiobj\t_\t_
4\ta\ta\tDET\t_\t_\t5\tdet\t_\t_
5\tletter\tletter\tNOUN\t_\tNumber=Sing\t2\tobj\t_\t_

"""


def line(i, form, head, rel, feats="_"):
    return f"{i}\t{form}\t_\tX\t_\t{feats}\t{head}\t{rel}\t_\t_"


def test_minimal_file():
    tb = parse_conllu("1\tHi\t_\tINTJ\t_\t_\t0\troot\t_\t_\n\n")
    assert len(tb) == 1
    (s,) = tb
    assert len(s) == 1 and s.tokens[0].head == 0 and s.tokens[0].deprel == "root"
    assert s.tokens[0].lemma is None


def test_letter_sentence():
    (s,) = parse_conllu(LETTER, language="en")
    assert s.forms == ("She", "wrote", "me", "a", "letter")
    assert s.heads == (2, 0, 2, 5, 2)
    assert s.deprels == ("nsubj", "root", "iobj", "det", "obj")
    assert validate_tree(s, "structure").ok
    assert validate_tree(s, "convention").ok
    assert is_projective(s)


def test_self_loop_reports_line():
    text = line(1, "a", 2, "nsubj") + "\n" + line(2, "b", 2, "root") + "\n\n"
    with pytest.raises(ConlluError, match="self-loop at line 2"):
        parse_conllu(text)


@pytest.mark.parametrize(
    "bad, message",
    [
        ("1\ta\t_\tX\t_\t_\t0\troot\t_\n", "expected 10 columns"),
        ("x\ta\t_\tX\t_\t_\t0\troot\t_\t_\n", "non-integer id"),
        ("1\ta\t_\tX\t_\t_\tz\troot\t_\t_\n", "non-integer head"),
        (line(1, "a", 0, "root") + "\n" + line(1, "b", 0, "x") + "\n", "duplicate id"),
        (line(1, "a", 0, "root") + "\n" + line(3, "b", 1, "x") + "\n", "gapped id"),
        (line(1, "a", 0, "root") + "\n" + line(2, "b", 7, "x") + "\n", "out of range"),
        (line(1, "a", 2, "x") + "\n" + line(2, "b", 1, "x") + "\n", "cycle"),
    ],
)
def test_parse_errors(bad, message):
    with pytest.raises(ConlluError, match=message):
        parse_conllu(bad + "\n")


def test_skip_mode_collects_errors():
    good = line(1, "a", 0, "root") + "\n\n"
    bad = line(1, "a", 1, "root") + "\n\n"
    errors = []
    tb = parse_conllu(good + bad + good, on_error="skip", errors=errors)
    assert len(tb) == 2
    assert len(errors) == 1 and errors[0].line == 3


def test_multiword_and_empty_nodes_pass_through():
    text = (
        "# sent_id = mw\n"
        "1-2\tdella\t_\t_\t_\t_\t_\t_\t_\t_\n"
        + line(1, "di", 2, "case") + "\n"
        + line(2, "la", 0, "root") + "\n"
        "2.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n"
        + line(3, ".", 2, "punct") + "\n\n"
    )
    tb = parse_conllu(text)
    assert len(tb[0]) == 3
    assert serialize_conllu(tb) == text


def test_feats_canonical_and_idempotent():
    f = parse_feats("Number=Sing|Case=Nom")
    assert f == (("Case", "Nom"), ("Number", "Sing"))
    assert canonical_feats(f) == f
    text = line(1, "a", 0, "root", feats="Z=1|A=2") + "\n\n"
    assert "A=2|Z=1" in serialize_conllu(parse_conllu(text))


def test_empty_treebank_serializes_to_empty_text():
    assert serialize_conllu(Treebank(())) == ""


def test_language_must_be_nonempty():
    with pytest.raises(ValueError):
        Treebank((), language="")


def test_validate_levels():
    (s,) = parse_conllu(LETTER)
    rootless = s.replace(tokens=tuple(
        t.replace(deprel="nsubj") if t.head == 0 else t for t in s.tokens
    ))
    assert validate_tree(rootless, "structure").ok
    report = validate_tree(rootless, "convention")
    assert not report.ok and any(i.startswith("rootless") for i in report.issues)

    cyc = s.replace(tokens=tuple(
        Token(i, "w", None, "X", None, (), h, "dep") for i, h in enumerate((2, 3, 1), 1)
    ))
    issues = validate_tree(cyc).issues
    assert any("cycle" in i for i in issues)
    assert any("no head-0" in i for i in issues)


def test_validate_reports_multiple_roots():
    s = parse_conllu(line(1, "a", 0, "root") + "\n" + line(2, "b", 0, "root") + "\n\n")[0]
    assert any("multiple head-0" in i for i in validate_tree(s).issues)


def _crossing_brute_force(heads):
    arcs = [(h, d) for d, h in enumerate(heads, 1)]
    for (h1, d1), (h2, d2) in itertools.combinations(arcs, 2):
        a, b = sorted((h1, d1))
        c, d = sorted((h2, d2))
        if a < c < b < d or c < a < d < b:
            return True
    return False


def test_projectivity_examples():
    assert not is_projective((3, 4, 0, 2))
    assert is_projective((2, 0)) and is_projective((0, 1))


def test_projectivity_matches_brute_force():
    for s in random_corpus(seed=5, count=400):
        assert is_projective(s) == (not _crossing_brute_force(s.heads))


@settings(max_examples=200, deadline=None)
@given(trees())
def test_round_trip(s):
    tb = Treebank((s,), "xx")
    text = serialize_conllu(tb)
    again = parse_conllu(text, "xx")
    assert again == tb
    assert serialize_conllu(again) == text


@settings(max_examples=200, deadline=None)
@given(trees())
def test_generator_yields_valid_trees(s):
    assert validate_tree(s).ok
