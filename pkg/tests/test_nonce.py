import numpy as np
import pytest

from lowparse.augment.nonce import (
    LexiconIndex,
    LexSignature,
    NonceAugmenter,
    NonceConfig,
    build_lexicon_index,
    nonce_augment,
    nonce_sentence,
    signature,
)
from lowparse.conllu import Sentence, Token, Treebank, parse_conllu, validate_tree
from treegen import random_corpus

LIBRARY = """# sent_id = lib
1\tHe\the\tPRON\t_\tCase=Nom\t2\tnsubj\t_\t_
2\tborrowed\tborrow\tVERB\t_\tTense=Past\t0\troot\t_\t_
3\ta\ta\tDET\t_\t_\t4\tdet\t_\t_
4\tbook\tbook\tNOUN\t_\tNumber=Sing\t2\tobj\t_\t_
5\tfrom\tfrom\tADP\t_\t_\t7\tcase\t_\t_
6\tthe\tthe\tDET\t_\t_\t7\tdet\t_\t_
7\tlibrary\tlibrary\tNOUN\t_\tNumber=Sing\t2\tobl\t_\t_
8\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_

"""


def library():
    return parse_conllu(LIBRARY)[0]


def structure(s):
    return [(t.id, t.head, t.deprel, t.upos, t.xpos, t.feats) for t in s.tokens]


def test_library_example_with_two_entry_index():
    s = library()
    idx = LexiconIndex()
    idx.add(signature(s.tokens[1]), "bought", "buy")
    idx.add(signature(s.tokens[6]), "shop", "shop")
    assert len(idx) == 2
    cfg = NonceConfig(p_replace=1.0)
    out = nonce_sentence(s, idx, cfg, np.random.default_rng(0))
    assert out.text == "He bought a book from the shop ."
    assert structure(out) == structure(s)
    # book has no alternative under its signature
    assert out.tokens[3].form == "book"
    assert (out.tokens[1].lemma, out.tokens[6].lemma) == ("buy", "shop")


def test_p_zero_is_identity():
    s = library()
    idx = build_lexicon_index(random_corpus(count=50))
    idx.add(signature(s.tokens[1]), "bought", "buy")
    assert nonce_sentence(s, idx, NonceConfig(p_replace=0.0), np.random.default_rng(0)) == s


def test_singleton_signatures_give_identity():
    s = library()
    idx = build_lexicon_index(Treebank((s,)))
    for seed in range(20):
        assert nonce_sentence(s, idx, NonceConfig(p_replace=1.0), np.random.default_rng(seed)) == s


def test_index_type_level_dedup():
    tok = Token(1, "kirja", "kirja", "NOUN", None, (), 0, "root")
    one = Sentence((tok,))
    idx = build_lexicon_index(Treebank((one, one)))
    assert len(idx) == 1
    assert idx[LexSignature("NOUN", (), "root")] == [("kirja", "kirja")]


def test_index_hand_enumerated():
    idx = build_lexicon_index(parse_conllu(LIBRARY))
    assert dict(idx.entries) == {
        LexSignature("VERB", (("Tense", "Past"),), "root"): [("borrowed", "borrow")],
        LexSignature("NOUN", (("Number", "Sing"),), "obj"): [("book", "book")],
        LexSignature("NOUN", (("Number", "Sing"),), "obl"): [("library", "library")],
    }


def test_subtypes_share_a_signature():
    a = Token(1, "x", None, "NOUN", None, (), 0, "obl")
    b = Token(1, "y", None, "NOUN", None, (), 0, "obl:tmod")
    assert signature(a) == signature(b)


def test_augment_counts_and_provenance():
    tb = random_corpus(seed=1, count=141)
    cfg = NonceConfig(copies=5, seed=3)
    out = nonce_augment(tb, build_lexicon_index(tb, cfg), cfg)
    assert len(out) == 141 + 705
    assert out.sentences[:141] == tb.sentences
    for k, s in enumerate(out.sentences[141:]):
        src = tb.sentences[k // 5]
        assert f"# augmented = nonce source = {src.sent_id}" in s.comments
        assert structure(s) == structure(src)


def test_copies_one_p_zero_duplicates():
    tb = random_corpus(seed=1, count=10)
    cfg = NonceConfig(p_replace=0.0, copies=1)
    out = nonce_augment(tb, build_lexicon_index(tb, cfg), cfg)
    assert [s.tokens for s in out.sentences[10:]] == [s.tokens for s in tb.sentences]


def test_property_on_random_corpus():
    tb = random_corpus(seed=6, count=1000)
    cfg = NonceConfig(p_replace=0.7, seed=5)
    idx = build_lexicon_index(tb, cfg)
    out = nonce_augment(tb, idx, cfg)
    changed = 0
    for k, s in enumerate(out.sentences[len(tb):]):
        src = tb.sentences[k // cfg.copies]
        assert validate_tree(s).ok
        assert structure(s) == structure(src)
        for a, b in zip(src.tokens, s.tokens):
            if (a.form, a.lemma) != (b.form, b.lemma):
                changed += 1
                assert a.upos in cfg.content_pos
                assert (b.form, b.lemma) in idx[signature(a)]
                assert b.form != a.form
    assert changed > 0


def test_deterministic():
    tb = random_corpus(seed=2, count=40)
    cfg = NonceConfig(seed=9)
    idx = build_lexicon_index(tb, cfg)
    assert nonce_augment(tb, idx, cfg) == nonce_augment(tb, idx, cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        NonceConfig(p_replace=-0.1)
    with pytest.raises(ValueError):
        NonceConfig(copies=0)


def test_estimator_api():
    tb = random_corpus(seed=2, count=20)
    aug = NonceAugmenter(copies=2, seed=4).fit(tb)
    cfg = NonceConfig(copies=2, seed=4)
    assert aug.transform(tb) == nonce_augment(tb, build_lexicon_index(tb, cfg), cfg)
    assert aug.get_params() == {"p_replace": 0.5, "copies": 2,
                                "content_pos": ("NOUN", "VERB", "ADJ"), "seed": 4}
