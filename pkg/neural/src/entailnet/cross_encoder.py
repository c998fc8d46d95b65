"""Cross-encoder reranker: joint encoding of (query, candidate), scored
from the leading sequence position, fine-tuned with the contrastive
softmax loss against in-case negatives.
"""

from __future__ import annotations

import random
from typing import Sequence

import torch
from torch import nn

from .backbones import BackboneError, TinyEncoder, build_backbone, make_tokenizer
from .data import NeuralConfig, TrainSample
from .tokenizer import HashTokenizer


def cross_encoder_input(query: str, candidate: str, tokenizer: HashTokenizer,
                        max_sequence_length: int = 512,
                        query_budget: int = 128) -> list[int]:
    """[CLS] query [SEP] candidate [SEP], head-preserving truncation.

    The query keeps at most ``query_budget`` tokens; the candidate is then
    tail-truncated so the whole sequence fits ``max_sequence_length``.
    """
    q_ids = tokenizer.encode(query)[:query_budget]
    room = max_sequence_length - len(q_ids) - 3  # CLS + two SEPs
    c_ids = tokenizer.encode(candidate)[: max(0, room)]
    return [tokenizer.cls_id] + q_ids + [tokenizer.sep_id] + c_ids \
        + [tokenizer.sep_id]


def _pad_batch(sequences: Sequence[list[int]], pad_id: int
               ) -> tuple[torch.Tensor, torch.Tensor]:
    width = max(len(s) for s in sequences)
    ids = torch.full((len(sequences), width), pad_id, dtype=torch.long)
    pad_mask = torch.ones((len(sequences), width), dtype=torch.bool)
    for i, seq in enumerate(sequences):
        ids[i, : len(seq)] = torch.tensor(seq, dtype=torch.long)
        pad_mask[i, : len(seq)] = False
    return ids, pad_mask


class CrossEncoderScorer(nn.Module):
    """Scorer handle: maps a (query, candidate) pair to a real score."""

    def __init__(self, cfg: NeuralConfig):
        super().__init__()
        self.cfg = cfg
        self.tokenizer = make_tokenizer()
        self.backbone = build_backbone(cfg.backbone, self.tokenizer.vocab_size,
                                       cfg.max_sequence_length)
        if not isinstance(self.backbone, TinyEncoder):
            raise BackboneError(
                "the bundled cross-encoder head only wires up built-in "
                "backbones; adapt the model for hf: checkpoints")
        d = self.backbone.d_model
        self.head = nn.Sequential(nn.Linear(d, d), nn.ReLU(), nn.Linear(d, 1))

    def forward(self, ids: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        hidden = self.backbone(ids, pad_mask)
        return self.head(hidden[:, 0, :]).squeeze(-1)

    def _encode_pairs(self, pairs: Sequence[tuple[str, str]]):
        return _pad_batch([
            cross_encoder_input(q, c, self.tokenizer,
                                self.cfg.max_sequence_length,
                                self.cfg.query_budget)
            for q, c in pairs], self.tokenizer.pad_id)

    @torch.no_grad()
    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        self.eval()
        ids, pad_mask = self._encode_pairs(pairs)
        return [float(s) for s in self(ids, pad_mask)]

    def score(self, query: str, candidate: str) -> float:
        return self.score_batch([(query, candidate)])[0]


def train_cross_encoder(samples: Sequence[TrainSample],
                        cfg: NeuralConfig = NeuralConfig()
                        ) -> CrossEncoderScorer:
    """Minimizes the mean contrastive loss over the samples.

    Deterministic for a fixed seed on a single-threaded CPU backend
    (threads are pinned here); other backends may introduce their own
    nondeterminism.
    """
    if not samples:
        raise ValueError("no training samples")
    torch.set_num_threads(1)
    torch.manual_seed(cfg.seed)
    model = CrossEncoderScorer(cfg)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    order = list(range(len(samples)))
    rng = random.Random(cfg.seed)
    model.train()
    for _ in range(cfg.epochs):
        rng.shuffle(order)
        for start in range(0, len(order), cfg.batch_size):
            batch = [samples[i] for i in order[start:start + cfg.batch_size]]
            optimizer.zero_grad()
            total = 0.0
            for sample in batch:
                pairs = [(sample.query_text, sample.positive_text)] + [
                    (sample.query_text, neg) for neg in sample.negative_texts]
                ids, pad_mask = model._encode_pairs(pairs)
                logits = model(ids, pad_mask)
                # contrastive softmax loss == cross-entropy with the
                # positive in slot 0
                total = total + nn.functional.cross_entropy(
                    logits[None, :], torch.zeros(1, dtype=torch.long))
            loss = total / len(batch)
            loss.backward()
            optimizer.step()
    model.eval()
    return model
