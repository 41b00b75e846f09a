"""Neural scoring model and the trainable parser built on it."""
from __future__ import annotations

from typing import Optional, Sequence

import torch

from ..conllu import Sentence, Treebank
from ..transition import OracleMode, ParseState
from .embeddings import EmbeddingTable, load_external_embeddings, read_word2vec_text, write_word2vec_text
from .network import ModelConfig, ParserNetwork
from .parser import TransitionParser, Vocabulary

__all__ = [
    "EmbeddingTable",
    "ModelConfig",
    "ParserNetwork",
    "TransitionParser",
    "Vocabulary",
    "encode_sentence",
    "extract_representations",
    "fine_tune",
    "load_external_embeddings",
    "parse_sentence",
    "read_word2vec_text",
    "score_transitions",
    "train",
    "write_word2vec_text",
]


def parser_from_config(
    cfg: ModelConfig,
    oracle: Optional[OracleMode] = None,
    external: Optional[EmbeddingTable] = None,
    **extra,
) -> TransitionParser:
    oracle = oracle or OracleMode()
    if external is not None and cfg.dim_external and cfg.dim_external != external.dim:
        raise ValueError(
            f"dim_external={cfg.dim_external} but the embedding table has dimension {external.dim}"
        )
    return TransitionParser(
        dim_word=cfg.dim_word,
        dim_char=cfg.dim_char,
        dim_char_lstm=cfg.dim_char_lstm,
        dim_word_lstm=cfg.dim_word_lstm,
        word_lstm_layers=cfg.word_lstm_layers,
        dim_lang=cfg.dim_lang,
        dim_mlp_hidden=cfg.dim_mlp_hidden,
        learning_rate=cfg.learning_rate,
        epochs_max=cfg.epochs_max,
        patience=cfg.patience,
        loss_margin=cfg.loss_margin,
        word_dropout=cfg.word_dropout,
        oracle=oracle.kind,
        exploration_prob=oracle.exploration_prob,
        exploration_from_epoch=oracle.exploration_from_epoch,
        external_embeddings=external,
        seed=cfg.seed,
        **extra,
    )


def train(
    cfg: ModelConfig,
    train_sets: Sequence[Treebank],
    dev: Treebank,
    oracle: Optional[OracleMode] = None,
    external: Optional[EmbeddingTable] = None,
) -> TransitionParser:
    """Train one model on all ``train_sets`` with early stopping on ``dev``."""
    return parser_from_config(cfg, oracle, external).fit(list(train_sets), dev=dev)


def fine_tune(model: TransitionParser, target: Treebank, dev: Treebank) -> TransitionParser:
    return model.fine_tune(target, dev)


def parse_sentence(model: TransitionParser, s: Sentence, lang: str) -> Sentence:
    return model.parse_sentence(s, lang)


def encode_sentence(model: TransitionParser, s: Sentence, lang: str):
    """``h_0..h_n`` as a ``(n+1, 2*dim_word_lstm)`` array."""
    with torch.no_grad():
        return model._encode(s, lang).numpy()


def score_transitions(model: TransitionParser, h, st: ParseState, n: int):
    return model.score_transitions(torch.as_tensor(h), st, n)


def extract_representations(model: TransitionParser, tb: Treebank, lang: Optional[str] = None,
                            layer: str = "word"):
    return model.transform(tb, layer=layer, language=lang)
