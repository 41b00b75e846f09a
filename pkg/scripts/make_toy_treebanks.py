"""Generate the bundled toy treebank pair.

Two synthetic languages share one grammar. The source ("src") is SVO
with prepositions; the target ("tgt") is mostly verb-final, has
case suffixes on nouns and a few extraposed adjectives (non-projective
arcs). Target word forms are regular sound changes of source forms, so
the pair overlaps in character trigrams far more than in whole words,
which is the situation cross-lingual training is meant to exploit.

Run from the repository root:

    python scripts/make_toy_treebanks.py

The output is deterministic.
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from lowparse.conllu import Sentence, Token, Treebank, serialize_conllu, validate_tree  # noqa: E402

OUT = ROOT / "src" / "lowparse" / "data" / "toy"

NOUNS = ["talo", "kirja", "poika", "tyttö", "koira", "kala", "puu", "järvi", "kivi",
         "lintu", "mies", "nainen", "opettaja", "kaupunki", "metsä", "vene", "kissa", "ikkuna"]
VERBS = ["näkee", "antaa", "ostaa", "lukee", "kantaa", "rakentaa", "löytää", "ottaa",
         "kirjoittaa", "myy", "tuo", "vie"]
ADJS = ["iso", "pieni", "vanha", "uusi", "punainen", "kaunis", "nopea", "musta"]
DETS = ["se", "tämä", "yksi"]
ADPS = ["kanssa", "luona", "alla", "päällä"]
ADVS = ["nyt", "eilen", "usein", "täällä"]

SOUND = [("ä", "á"), ("ö", "o"), ("y", "u"), ("k", "g"), ("t", "d"), ("aa", "á"), ("ee", "ea")]


def shift(form: str) -> str:
    out = form
    for a, b in SOUND:
        out = out.replace(a, b)
    return out


TGT_CASE = {"nsubj": "", "obj": "m", "iobj": "i", "obl": "s"}


def tgt_noun(form: str, rel: str) -> str:
    return shift(form) + TGT_CASE.get(rel, "")


class Builder:
    """Accumulates tokens as (key, form, lemma, upos, feats, head_key, deprel)."""

    def __init__(self):
        self.items = []

    def add(self, key, form, lemma, upos, feats, head, rel):
        self.items.append((key, form, lemma, upos, feats, head, rel))

    def sentence(self, order, sid, text_lang):
        pos = {key: i + 1 for i, key in enumerate(order)}
        by_key = {it[0]: it for it in self.items}
        tokens = []
        for key in order:
            _, form, lemma, upos, feats, head, rel = by_key[key]
            tokens.append(Token(pos[key], form, lemma, upos, None, feats,
                                0 if head is None else pos[head], rel))
        text = " ".join(t.form for t in tokens)
        return Sentence(tuple(tokens), (f"# sent_id = {text_lang}-{sid}", f"# text = {text}"))


def noun_phrase(b, rng, name, head, rel, lang):
    n = NOUNS[rng.integers(len(NOUNS))]
    case = {"nsubj": "Nom", "obj": "Acc", "iobj": "Dat", "obl": "Loc"}[rel]
    form = n if lang == "src" else tgt_noun(n, rel)
    lemma = n if lang == "src" else shift(n)
    b.add(name, form, lemma, "NOUN", (("Case", case), ("Number", "Sing")), head, rel)
    keys = []
    if rng.random() < 0.5:
        d = DETS[rng.integers(len(DETS))]
        d = d if lang == "src" else shift(d)
        b.add(name + "-det", d, d, "DET", (("PronType", "Dem"),), name, "det")
        keys.append(name + "-det")
    if rng.random() < 0.4:
        a = ADJS[rng.integers(len(ADJS))]
        a = a if lang == "src" else shift(a)
        b.add(name + "-amod", a, a, "ADJ", (("Degree", "Pos"),), name, "amod")
        keys.append(name + "-amod")
    prep = []
    if rel == "obl" and lang == "src":
        p = ADPS[rng.integers(len(ADPS))]
        b.add(name + "-case", p, p, "ADP", (), name, "case")
        prep = [name + "-case"]
    return prep + keys + [name]


def make_sentence(rng, lang, sid):
    b = Builder()
    v = VERBS[rng.integers(len(VERBS))]
    vform = v if lang == "src" else shift(v)
    b.add("V", vform, vform, "VERB", (("Mood", "Ind"), ("Tense", "Pres")), None, "root")
    subj = noun_phrase(b, rng, "S", "V", "nsubj", lang)
    parts = {"S": subj}
    if rng.random() < 0.3:
        parts["I"] = noun_phrase(b, rng, "I", "V", "iobj", lang)
    if rng.random() < 0.8:
        parts["O"] = noun_phrase(b, rng, "O", "V", "obj", lang)
    if rng.random() < 0.4:
        parts["L"] = noun_phrase(b, rng, "L", "V", "obl", lang)
    adv = []
    if rng.random() < 0.3:
        a = ADVS[rng.integers(len(ADVS))]
        a = a if lang == "src" else shift(a)
        b.add("A", a, a, "ADV", (), "V", "advmod")
        adv = ["A"]
    b.add("P", ".", ".", "PUNCT", (), "V", "punct")

    if lang == "src":
        order = parts["S"] + ["V"] + adv
        for k in ("I", "O", "L"):
            order += parts.get(k, [])
    else:
        args = [parts[k] for k in ("I", "O", "L") if k in parts]
        if len(args) > 1 and rng.random() < 0.3:
            args = args[::-1]
        order = parts["S"] + adv
        for a in args:
            order += a
        order += ["V"]
        # extrapose the subject's adjective past the verb: a crossing arc
        if "S-amod" in order and rng.random() < 0.25:
            order.remove("S-amod")
            order.append("S-amod")
    order.append("P")
    return b.sentence(order, sid, lang)


def generate(lang: str, count: int, seed: int) -> Treebank:
    rng = np.random.default_rng(seed)
    sents = tuple(make_sentence(rng, lang, i + 1) for i in range(count))
    for s in sents:
        report = validate_tree(s, "convention")
        assert report.ok, (s.sent_id, report.issues)
    return Treebank(sents, lang)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    specs = [("src", "train", 300, 11), ("tgt", "train", 300, 12), ("tgt", "dev", 100, 13)]
    for lang, part, count, seed in specs:
        tb = generate(lang, count, seed)
        (OUT / f"{lang}_{part}.conllu").write_text(serialize_conllu(tb), encoding="utf-8")
        print(f"{lang}_{part}.conllu: {len(tb)} sentences")


if __name__ == "__main__":
    main()
