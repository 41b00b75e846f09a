"""Scoring network: character biLSTM, word biLSTM and a transition MLP.

Token inputs are ``[e_w; e_p; e_c; l]`` (word embedding, optional
pre-trained embedding, character encoding, language embedding); the
character biLSTM reads ``[c_j; l]``. Position 0 is the artificial root,
encoded from dedicated root word and root character symbols.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import torch
from torch import nn
from torch.nn.utils.rnn import pack_sequence

N_FEATURES = 4  # s2, s1, s0, b0


@dataclass(frozen=True)
class ModelConfig:
    dim_word: int = 100
    dim_char: int = 24
    dim_char_lstm: int = 100
    dim_word_lstm: int = 125
    word_lstm_layers: int = 2
    dim_lang: int = 12
    dim_mlp_hidden: int = 100
    dim_external: int = 0
    learning_rate: float = 1e-3
    epochs_max: int = 30
    patience: int = 5
    loss_margin: float = 1.0
    word_dropout: float = 0.25
    seed: int = 0

    def __post_init__(self):
        for name in ("dim_word", "dim_char", "dim_char_lstm", "dim_word_lstm",
                     "word_lstm_layers", "dim_mlp_hidden"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.dim_lang < 0 or self.dim_external < 0:
            raise ValueError("dim_lang and dim_external must be >= 0")
        if self.patience > self.epochs_max:
            raise ValueError("patience must not exceed epochs_max")

    def to_dict(self) -> dict:
        return asdict(self)


class ParserNetwork(nn.Module):
    def __init__(
        self,
        cfg: ModelConfig,
        n_words: int,
        n_chars: int,
        n_langs: int,
        n_labels: int,
        n_external: int = 0,
    ):
        super().__init__()
        self.cfg = cfg
        self.n_labels = n_labels
        self.word_emb = nn.Embedding(n_words, cfg.dim_word)
        self.char_emb = nn.Embedding(n_chars, cfg.dim_char)
        self.lang_emb = nn.Embedding(n_langs, cfg.dim_lang) if cfg.dim_lang else None
        self.ext_emb = (
            nn.Embedding(n_external, cfg.dim_external) if cfg.dim_external else None
        )
        self.char_lstm = nn.LSTM(
            cfg.dim_char + cfg.dim_lang, cfg.dim_char_lstm, bidirectional=True, batch_first=True
        )
        word_in = cfg.dim_word + cfg.dim_external + 2 * cfg.dim_char_lstm + cfg.dim_lang
        self.word_lstm = nn.LSTM(
            word_in, cfg.dim_word_lstm, num_layers=cfg.word_lstm_layers, bidirectional=True
        )
        dim_h = 2 * cfg.dim_word_lstm
        self.pad = nn.Parameter(torch.zeros(dim_h))
        self.hidden = nn.Linear(N_FEATURES * dim_h, cfg.dim_mlp_hidden)
        self.out = nn.Linear(cfg.dim_mlp_hidden, 2 * n_labels + 2)
        nn.init.normal_(self.pad, std=0.1)

    def encode_chars(self, char_ids: Sequence[Sequence[int]], lang: Optional[torch.Tensor]) -> torch.Tensor:
        """Character encodings ``e_c``, one row per word: ``(n_words, 2*dim_char_lstm)``."""
        seqs = []
        for ids in char_ids:
            x = self.char_emb(torch.as_tensor(ids, dtype=torch.long))
            if lang is not None:
                x = torch.cat([x, lang.expand(len(ids), -1)], dim=1)
            seqs.append(x)
        packed = pack_sequence(seqs, enforce_sorted=False)
        _, (h_n, _) = self.char_lstm(packed)
        # final forward state and final backward state (after the first char)
        return torch.cat([h_n[0], h_n[1]], dim=1)

    def word_inputs(
        self,
        word_ids: Sequence[int],
        char_ids: Sequence[Sequence[int]],
        lang_id: int,
        ext_ids: Optional[Sequence[int]] = None,
    ) -> dict:
        lang = None
        if self.lang_emb is not None:
            lang = self.lang_emb(torch.as_tensor([lang_id], dtype=torch.long))[0]
        e_w = self.word_emb(torch.as_tensor(word_ids, dtype=torch.long))
        e_c = self.encode_chars(char_ids, lang)
        parts = [e_w]
        if self.ext_emb is not None:
            ids = ext_ids if ext_ids is not None else [0] * len(word_ids)
            parts.append(self.ext_emb(torch.as_tensor(ids, dtype=torch.long)))
        parts.append(e_c)
        if lang is not None:
            parts.append(lang.expand(len(word_ids), -1))
        return {"x": torch.cat(parts, dim=1), "e_c": e_c}

    def encode(self, word_ids, char_ids, lang_id, ext_ids=None, return_chars=False):
        """Context vectors ``h_0..h_n`` of shape ``(n+1, 2*dim_word_lstm)``."""
        inputs = self.word_inputs(word_ids, char_ids, lang_id, ext_ids)
        h, _ = self.word_lstm(inputs["x"].unsqueeze(1))
        h = h.squeeze(1)
        if return_chars:
            return h, inputs["e_c"]
        return h

    def features(self, h: torch.Tensor, stack: Sequence[int], buffer: Sequence[int]) -> torch.Tensor:
        picks = [
            h[stack[-3]] if len(stack) >= 3 else self.pad,
            h[stack[-2]] if len(stack) >= 2 else self.pad,
            h[stack[-1]] if len(stack) >= 1 else self.pad,
            h[buffer[0]] if buffer else self.pad,
        ]
        return torch.cat(picks)

    def score(self, h: torch.Tensor, stack, buffer) -> torch.Tensor:
        """Scores laid out as ``[SHIFT, SWAP, LEFT_ARC(l)..., RIGHT_ARC(l)...]``."""
        return self.out(torch.tanh(self.hidden(self.features(h, stack, buffer))))
