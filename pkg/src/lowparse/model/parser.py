"""Transition-based parser estimator: training, fine-tuning and decoding."""
from __future__ import annotations

import copy
import io
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import torch
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..conllu import Sentence, Treebank, validate_tree
from ..evaluation import score as eval_score
from ..representations import Representations
from ..rng import stream, torch_seed
from ..transition import (
    INF,
    LEFT_ARC,
    RIGHT_ARC,
    SHIFT,
    SWAP,
    GoldTree,
    OracleMode,
    ParseState,
    Transition,
    apply_transition,
    dynamic_costs,
    legal_kinds,
    static_next,
)
from ..validation import check_treebank, check_treebanks
from .embeddings import EmbeddingTable
from .network import ModelConfig, ParserNetwork

log = logging.getLogger(__name__)

UNK, ROOT = "<unk>", "<root>"
CHECKPOINT_FORMAT = "lowparse-parser"
CHECKPOINT_VERSION = 1


@dataclass
class Vocabulary:
    words: dict = field(default_factory=dict)
    chars: dict = field(default_factory=dict)
    langs: dict = field(default_factory=dict)
    labels: list = field(default_factory=list)
    external: dict = field(default_factory=dict)

    @classmethod
    def build(cls, treebanks: Sequence[Treebank], external: Optional[EmbeddingTable] = None):
        words = {UNK: 0, ROOT: 1}
        chars = {UNK: 0, ROOT: 1}
        langs: dict[str, int] = {}
        labels: set[str] = set()
        for tb in treebanks:
            langs.setdefault(tb.language, len(langs))
            for s in tb:
                for t in s.tokens:
                    words.setdefault(t.form, len(words))
                    for c in t.form:
                        chars.setdefault(c, len(chars))
                    labels.add(t.deprel)
        ext = {}
        if external is not None:
            ext = {w: i + 1 for i, w in enumerate(external.words)}
        return cls(words, chars, langs, sorted(labels), ext)

    def to_dict(self) -> dict:
        return {
            "words": list(self.words),
            "chars": list(self.chars),
            "langs": list(self.langs),
            "labels": list(self.labels),
            "external": list(self.external),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls(
            {w: i for i, w in enumerate(d["words"])},
            {c: i for i, c in enumerate(d["chars"])},
            {lang: i for i, lang in enumerate(d["langs"])},
            list(d["labels"]),
            {w: i + 1 for i, w in enumerate(d["external"])},
        )


class TransitionParser(BaseEstimator):
    """Greedy arc-hybrid parser with SWAP over biLSTM features.

    ``fit`` takes one treebank or a list of them; each treebank's
    ``language`` selects its language embedding, so passing a source and a
    target treebank trains one cross-lingual model. Dev LAS drives early
    stopping. The width of the pre-trained embedding slot is read off
    ``external_embeddings``; without them the slot is disabled.
    """

    def __init__(
        self,
        dim_word=100,
        dim_char=24,
        dim_char_lstm=100,
        dim_word_lstm=125,
        word_lstm_layers=2,
        dim_lang=12,
        dim_mlp_hidden=100,
        learning_rate=1e-3,
        epochs_max=30,
        patience=5,
        loss_margin=1.0,
        word_dropout=0.25,
        oracle="static_dynamic",
        exploration_prob=0.1,
        exploration_from_epoch=2,
        external_embeddings=None,
        fallback_language=None,
        seed=0,
    ):
        self.dim_word = dim_word
        self.dim_char = dim_char
        self.dim_char_lstm = dim_char_lstm
        self.dim_word_lstm = dim_word_lstm
        self.word_lstm_layers = word_lstm_layers
        self.dim_lang = dim_lang
        self.dim_mlp_hidden = dim_mlp_hidden
        self.learning_rate = learning_rate
        self.epochs_max = epochs_max
        self.patience = patience
        self.loss_margin = loss_margin
        self.word_dropout = word_dropout
        self.oracle = oracle
        self.exploration_prob = exploration_prob
        self.exploration_from_epoch = exploration_from_epoch
        self.external_embeddings = external_embeddings
        self.fallback_language = fallback_language
        self.seed = seed

    # -- setup ---------------------------------------------------------

    def _model_config(self) -> ModelConfig:
        ext = self.external_embeddings
        return ModelConfig(
            dim_word=self.dim_word,
            dim_char=self.dim_char,
            dim_char_lstm=self.dim_char_lstm,
            dim_word_lstm=self.dim_word_lstm,
            word_lstm_layers=self.word_lstm_layers,
            dim_lang=self.dim_lang,
            dim_mlp_hidden=self.dim_mlp_hidden,
            dim_external=ext.dim if ext is not None else 0,
            learning_rate=self.learning_rate,
            epochs_max=self.epochs_max,
            patience=self.patience,
            loss_margin=self.loss_margin,
            word_dropout=self.word_dropout,
            seed=self.seed,
        )

    def _oracle_mode(self) -> OracleMode:
        return OracleMode(self.oracle, self.exploration_prob, self.exploration_from_epoch)

    def _build_network(self, cfg: ModelConfig, vocab: Vocabulary) -> ParserNetwork:
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(torch_seed(cfg.seed, "init"))
            net = ParserNetwork(
                cfg,
                n_words=len(vocab.words),
                n_chars=len(vocab.chars),
                n_langs=max(len(vocab.langs), 1),
                n_labels=len(vocab.labels),
                n_external=len(vocab.external) + 1,
            )
        net.double()
        ext = self.external_embeddings
        if ext is not None and len(ext):
            with torch.no_grad():
                net.ext_emb.weight[0].zero_()
                net.ext_emb.weight[1:] = torch.as_tensor(ext.vectors, dtype=torch.float64)
        return net

    # -- encoding ------------------------------------------------------

    def _lang_id(self, lang: str) -> int:
        langs = self.vocab_.langs
        if lang in langs:
            return langs[lang]
        if self.fallback_language is not None and self.fallback_language in langs:
            return langs[self.fallback_language]
        raise ValueError(
            f"unknown language {lang!r}; model knows {sorted(langs)} and has no fallback"
        )

    def _inputs(self, s: Sentence, rng: Optional[np.random.Generator] = None, dropout: float = 0.0):
        vocab = self.vocab_
        words, chars = vocab.words, vocab.chars
        word_ids = [words[ROOT]]
        char_ids = [[chars[ROOT]]]
        ext_ids = [0]
        for t in s.tokens:
            wid = words.get(t.form, 0)
            if dropout and rng is not None and rng.random() < dropout:
                wid = 0
            word_ids.append(wid)
            char_ids.append([chars.get(c, 0) for c in t.form] or [0])
            ext_ids.append(vocab.external.get(t.form, 0))
        return word_ids, char_ids, ext_ids

    def _encode(self, s: Sentence, lang: str, rng=None, dropout=0.0, return_chars=False):
        word_ids, char_ids, ext_ids = self._inputs(s, rng, dropout)
        return self.network_.encode(
            word_ids, char_ids, self._lang_id(lang), ext_ids, return_chars=return_chars
        )

    # -- transitions <-> score vector ------------------------------------

    def _index(self, t: Transition) -> int:
        if t.kind == SHIFT:
            return 0
        if t.kind == SWAP:
            return 1
        li = self.label_index_[t.label]
        return 2 + li if t.kind == LEFT_ARC else 2 + len(self.vocab_.labels) + li

    def _transition(self, i: int) -> Transition:
        if i == 0:
            return Transition(SHIFT)
        if i == 1:
            return Transition(SWAP)
        n_lab = len(self.vocab_.labels)
        i -= 2
        if i < n_lab:
            return Transition(LEFT_ARC, self.vocab_.labels[i])
        return Transition(RIGHT_ARC, self.vocab_.labels[i - n_lab])

    def _legal_mask(self, st: ParseState, n: int) -> np.ndarray:
        n_lab = len(self.vocab_.labels)
        mask = np.zeros(2 * n_lab + 2, dtype=bool)
        kinds = legal_kinds(st, n)
        mask[0] = SHIFT in kinds
        mask[1] = SWAP in kinds
        mask[2:2 + n_lab] = LEFT_ARC in kinds
        mask[2 + n_lab:] = RIGHT_ARC in kinds
        return mask

    def _cost_vector(self, st: ParseState, gold: GoldTree, mode: OracleMode) -> np.ndarray:
        costs = np.full(2 * len(self.vocab_.labels) + 2, INF)
        if mode.kind == "static":
            costs[self._index(static_next(st, gold))] = 0.0
            return costs
        for t, c in dynamic_costs(st, gold, self.vocab_.labels).items():
            costs[self._index(t)] = c
        return costs

    # -- training ------------------------------------------------------

    def sentence_loss(
        self,
        s: Sentence,
        lang: str,
        mode: Optional[OracleMode] = None,
        rng: Optional[np.random.Generator] = None,
        explore: bool = False,
        dropout: float = 0.0,
    ) -> torch.Tensor:
        """Summed hinge loss along the oracle's path through ``s``.

        At each step the best-scoring lowest-cost transition should beat
        the best-scoring other legal transition by ``loss_margin``.
        """
        mode = mode or self._oracle_mode()
        margin = self.config_.loss_margin
        gold = GoldTree.from_sentence(s)
        n = gold.n
        h = self._encode(s, lang, rng, dropout)
        st = ParseState.initial(n)
        total = h.new_zeros(())
        while not st.terminal:
            scores = self.network_.score(h, st.stack, st.buffer)
            values = scores.detach().numpy()
            legal = self._legal_mask(st, n)
            costs = self._cost_vector(st, gold, mode)
            best_cost = costs[legal].min()
            correct = legal & (costs == best_cost)
            wrong = legal & ~correct
            masked = np.where(correct, values, -np.inf)
            good = int(np.argmax(masked))
            if wrong.any():
                bad = int(np.argmax(np.where(wrong, values, -np.inf)))
                if values[good] - values[bad] < margin:
                    total = total + margin - scores[good] + scores[bad]
            choice = good
            if explore and rng is not None and rng.random() < mode.exploration_prob:
                pred = int(np.argmax(np.where(legal, values, -np.inf)))
                if math.isfinite(costs[pred]):
                    choice = pred
            st = apply_transition(st, self._transition(choice), n, check=False)
        return total

    def _check_labels(self, treebanks):
        known = set(self.vocab_.labels)
        for tb in treebanks:
            for s in tb:
                for t in s.tokens:
                    if t.deprel not in known:
                        raise ValueError(
                            f"label inventory mismatch: {t.deprel!r} in {tb.language} "
                            "treebank is unknown to the model"
                        )

    @staticmethod
    def _trainable(treebanks):
        items = []
        for tb in treebanks:
            for s in tb:
                if validate_tree(s).ok:
                    items.append((s, tb.language))
                else:
                    log.warning("skipping malformed training sentence %s", s.sent_id)
        if not items:
            raise ValueError("no well-formed training sentences")
        return items

    def _run_epochs(self, items, dev, stage: str, start_las: float = -1.0):
        cfg = self.config_
        mode = self._oracle_mode()
        optim = torch.optim.Adam(self.network_.parameters(), lr=cfg.learning_rate)
        best_las = start_las
        best_state = copy.deepcopy(self.network_.state_dict())
        best_epoch = 0
        stale = 0
        history = []
        for epoch in range(1, cfg.epochs_max + 1):
            t0 = time.perf_counter()
            self.network_.train()
            order = stream(cfg.seed, f"{stage}-epoch", epoch).permutation(len(items))
            rng = stream(cfg.seed, f"{stage}-sample", epoch)
            explore = mode.kind == "static_dynamic" and epoch >= mode.exploration_from_epoch
            epoch_loss = 0.0
            for i in order:
                s, lang = items[i]
                optim.zero_grad()
                loss = self.sentence_loss(s, lang, mode, rng, explore, cfg.word_dropout)
                if loss.requires_grad:
                    loss.backward()
                    optim.step()
                epoch_loss += float(loss.detach())
            dev_las = self._dev_las(dev) if dev is not None else float(epoch)
            history.append({"stage": stage, "epoch": epoch, "loss": epoch_loss, "dev_las": dev_las,
                            "seconds": time.perf_counter() - t0})
            log.info("%s epoch %d loss %.3f dev LAS %.4f", stage, epoch, epoch_loss, dev_las)
            if dev_las > best_las:
                best_las, best_epoch, stale = dev_las, epoch, 0
                best_state = copy.deepcopy(self.network_.state_dict())
            else:
                stale += 1
                if stale >= cfg.patience:
                    break
        self.network_.load_state_dict(best_state)
        self.network_.eval()
        return best_las, best_epoch, history

    def _dev_las(self, dev: Treebank) -> float:
        return eval_score(dev, self.predict(dev)).las

    def fit(self, X, y=None, dev=None):
        """Train on one or more treebanks; ``dev`` enables early stopping."""
        treebanks = check_treebanks(X)
        if not any(len(tb) for tb in treebanks):
            raise ValueError("empty training data")
        if dev is not None:
            dev = check_treebank(dev)
            if not len(dev):
                raise ValueError("empty dev treebank")
        self.config_ = self._model_config()
        self.vocab_ = Vocabulary.build(treebanks, self.external_embeddings)
        self.label_index_ = {lab: i for i, lab in enumerate(self.vocab_.labels)}
        self.network_ = self._build_network(self.config_, self.vocab_)
        items = self._trainable(treebanks)
        las, epoch, history = self._run_epochs(items, dev, "train")
        self.best_dev_las_ = las if dev is not None else None
        self.best_epoch_ = epoch
        self.history_ = history
        return self

    def fine_tune(self, X, dev):
        """Continue training on the target treebank only.

        Returns a new fitted parser. Its recorded dev LAS is never below
        this model's LAS on ``dev``: if no epoch improves on it, the input
        parameters are returned unchanged.
        """
        check_is_fitted(self, "network_")
        target = check_treebank(X)
        dev = check_treebank(dev)
        for tb in (target, dev):
            if tb.language not in self.vocab_.langs:
                raise ValueError(f"unknown language {tb.language!r} for fine-tuning")
        self._check_labels([target])
        tuned = copy.deepcopy(self)
        start = tuned._dev_las(dev)
        las, epoch, history = tuned._run_epochs(tuned._trainable([target]), dev, "finetune", start)
        tuned.best_dev_las_ = las
        tuned.best_epoch_ = epoch
        tuned.start_dev_las_ = start
        tuned.history_ = list(getattr(self, "history_", [])) + history
        return tuned

    # -- inference -----------------------------------------------------

    def score_transitions(self, h: torch.Tensor, st: ParseState, n: int) -> np.ndarray:
        """Scores of every (kind, label) with illegal transitions at ``-inf``."""
        with torch.no_grad():
            values = self.network_.score(h, st.stack, st.buffer).numpy().copy()
        values[~self._legal_mask(st, n)] = -np.inf
        return values

    def parse_sentence(self, s: Sentence, lang: str) -> Sentence:
        check_is_fitted(self, "network_")
        n = len(s)
        with torch.no_grad():
            h = self._encode(s, lang)
        st = ParseState.initial(n)
        while not st.terminal:
            choice = int(np.argmax(self.score_transitions(h, st, n)))
            st = apply_transition(st, self._transition(choice), n, check=False)
        head = {d: (hd, lab) for hd, d, lab in st.arcs}
        tokens = tuple(t.replace(head=head[t.id][0], deprel=head[t.id][1]) for t in s.tokens)
        return s.replace(tokens=tokens)

    def predict(self, X, language: Optional[str] = None) -> Treebank:
        tb = check_treebank(X)
        lang = language or tb.language
        self.network_.eval()
        return tb.replace(sentences=tuple(self.parse_sentence(s, lang) for s in tb))

    def score(self, X, y=None) -> float:
        """Labelled attachment score on a gold treebank."""
        tb = check_treebank(X)
        return eval_score(tb, self.predict(tb)).las

    def transform(self, X, layer: str = "word", language: Optional[str] = None) -> Representations:
        """Frozen per-token representations (``layer`` is ``char`` or ``word``)."""
        check_is_fitted(self, "network_")
        if layer not in ("char", "word"):
            raise ValueError(f"layer must be 'char' or 'word', got {layer!r}")
        tb = check_treebank(X)
        lang = language or tb.language
        keys, forms, upos, rows = [], [], [], []
        self.network_.eval()
        with torch.no_grad():
            for sid, s in zip(tb.sentence_ids(), tb):
                h, e_c = self._encode(s, lang, return_chars=True)
                vecs = (e_c if layer == "char" else h)[1:].numpy()
                for t, v in zip(s.tokens, vecs):
                    keys.append((sid, t.id))
                    forms.append(t.form)
                    upos.append(t.upos)
                    rows.append(v)
        dim = 2 * (self.config_.dim_char_lstm if layer == "char" else self.config_.dim_word_lstm)
        vectors = np.vstack(rows) if rows else np.zeros((0, dim))
        return Representations(keys, forms, upos, vectors)

    # -- persistence ---------------------------------------------------

    def save(self, path) -> None:
        check_is_fitted(self, "network_")
        payload = {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "params": {k: v for k, v in self.get_params().items() if k != "external_embeddings"},
            "config": self.config_.to_dict(),
            "vocab": self.vocab_.to_dict(),
            "best_dev_las": self.best_dev_las_,
            "best_epoch": self.best_epoch_,
            "state_dict": self.network_.state_dict(),
        }
        buf = io.BytesIO()
        torch.save(payload, buf)
        with open(path, "wb") as fh:
            fh.write(buf.getvalue())

    @classmethod
    def load(cls, path) -> "TransitionParser":
        payload = torch.load(path, map_location="cpu", weights_only=False)
        if payload.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"{path} is not a parser checkpoint")
        if payload.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {payload.get('version')}")
        model = cls(**payload["params"])
        model.config_ = ModelConfig(**payload["config"])
        model.vocab_ = Vocabulary.from_dict(payload["vocab"])
        model.label_index_ = {lab: i for i, lab in enumerate(model.vocab_.labels)}
        model.best_dev_las_ = payload["best_dev_las"]
        model.best_epoch_ = payload["best_epoch"]
        net = ParserNetwork(
            model.config_,
            n_words=len(model.vocab_.words),
            n_chars=len(model.vocab_.chars),
            n_langs=max(len(model.vocab_.langs), 1),
            n_labels=len(model.vocab_.labels),
            n_external=len(model.vocab_.external) + 1,
        ).double()
        net.load_state_dict(payload["state_dict"])
        net.eval()
        model.network_ = net
        return model
