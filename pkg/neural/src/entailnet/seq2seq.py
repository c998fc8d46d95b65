"""Sequence-to-sequence style relevance scoring.

The prompt "Query: [Q] Document: [P] Relevant:" is encoded and the model's
first generated position is read out as a distribution over the
vocabulary; the relevance score is the probability of the "true" token
normalized against {"true", "false"}, so it always lies strictly inside
(0, 1). Fine-tuning teaches "true" on gold pairs and "false" on negatives.
"""

from __future__ import annotations

import random
from typing import Sequence

import torch
from torch import nn

from .backbones import BackboneError, TinyEncoder, build_backbone, make_tokenizer
from .cross_encoder import _pad_batch
from .data import NeuralConfig, TrainSample
from .tokenizer import HashTokenizer


def seq2seq_prompt(query: str, candidate: str, tokenizer: HashTokenizer,
                   max_sequence_length: int = 512,
                   query_budget: int = 128) -> list[int]:
    """Token ids of the relevance prompt, with the same truncation budgets
    as the cross-encoder input."""
    marker_query = tokenizer.encode("query")
    marker_doc = tokenizer.encode("document")
    marker_rel = tokenizer.encode("relevant")
    q_ids = tokenizer.encode(query)[:query_budget]
    overhead = len(marker_query) + len(marker_doc) + len(marker_rel)
    room = max_sequence_length - len(q_ids) - overhead
    c_ids = tokenizer.encode(candidate)[: max(0, room)]
    return marker_query + q_ids + marker_doc + c_ids + marker_rel


class Seq2SeqScorer(nn.Module):
    """Scores via the normalized probability of generating "true"."""

    def __init__(self, cfg: NeuralConfig):
        super().__init__()
        self.cfg = cfg
        self.tokenizer = make_tokenizer()
        if not hasattr(self.tokenizer, "target_token_ids"):
            raise BackboneError("tokenizer lacks the true/false target tokens")
        self.backbone = build_backbone(cfg.backbone, self.tokenizer.vocab_size,
                                       cfg.max_sequence_length)
        if not isinstance(self.backbone, TinyEncoder):
            raise BackboneError(
                "the bundled seq2seq head only wires up built-in backbones")
        self.vocab_head = nn.Linear(self.backbone.d_model,
                                    self.tokenizer.vocab_size)

    def forward(self, ids: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        """Vocabulary logits at the first generated position, per row."""
        hidden = self.backbone(ids, pad_mask)
        return self.vocab_head(hidden[:, 0, :])

    def _encode_pairs(self, pairs: Sequence[tuple[str, str]]):
        return _pad_batch([
            seq2seq_prompt(q, c, self.tokenizer,
                           self.cfg.max_sequence_length, self.cfg.query_budget)
            for q, c in pairs], self.tokenizer.pad_id)

    @torch.no_grad()
    def score_batch(self, pairs: Sequence[tuple[str, str]],
                    targets: tuple[int, int] | None = None) -> list[float]:
        self.eval()
        if targets is None:
            targets = self.tokenizer.target_token_ids()
        true_id, false_id = targets
        ids, pad_mask = self._encode_pairs(pairs)
        logits = self(ids, pad_mask)
        two_way = torch.stack([logits[:, true_id], logits[:, false_id]], dim=1)
        probs = torch.softmax(two_way, dim=1)[:, 0]
        return [float(p) for p in probs]

    def score(self, query: str, candidate: str,
              targets: tuple[int, int] | None = None) -> float:
        return self.score_batch([(query, candidate)], targets)[0]


def seq2seq_score(query: str, candidate: str, scorer: Seq2SeqScorer) -> float:
    """Relevance of one pair as the normalized "true"-token probability."""
    return scorer.score(query, candidate)


def train_seq2seq(samples: Sequence[TrainSample],
                  cfg: NeuralConfig = NeuralConfig()) -> Seq2SeqScorer:
    """Fine-tunes the true/false targets: gold pairs generate "true",
    in-case negatives generate "false". Determinism as for the
    cross-encoder trainer."""
    if not samples:
        raise ValueError("no training samples")
    torch.set_num_threads(1)
    torch.manual_seed(cfg.seed)
    model = Seq2SeqScorer(cfg)
    true_id, false_id = model.tokenizer.target_token_ids()
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)

    pairs: list[tuple[str, str, int]] = []
    for sample in samples:
        pairs.append((sample.query_text, sample.positive_text, true_id))
        for neg in sample.negative_texts:
            pairs.append((sample.query_text, neg, false_id))

    order = list(range(len(pairs)))
    rng = random.Random(cfg.seed)
    model.train()
    for _ in range(cfg.epochs):
        rng.shuffle(order)
        for start in range(0, len(order), cfg.batch_size):
            batch = [pairs[i] for i in order[start:start + cfg.batch_size]]
            optimizer.zero_grad()
            ids, pad_mask = model._encode_pairs([(q, c) for q, c, _ in batch])
            logits = model(ids, pad_mask)
            two_way = torch.stack([logits[:, true_id], logits[:, false_id]],
                                  dim=1)
            target = torch.tensor([0 if t == true_id else 1
                                   for _, _, t in batch], dtype=torch.long)
            loss = nn.functional.cross_entropy(two_way, target)
            loss.backward()
            optimizer.step()
    model.eval()
    return model
