"""Reads the ranking pipeline's JSONL dataset format and builds training samples.

The interchange contract: one JSON object per line with ``query_id``,
``query_text``, ``candidates`` (array of ``{para_id, text}``) and optional
``gold`` (array of para_id). Placeholder tokens such as FRAGMENT_SUPPRESSED
are stripped here exactly as the consumer pipeline strips them.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

_PLACEHOLDER = re.compile(r"\b[A-Z][A-Z_]*SUPPRESSED\b")
_WHITESPACE = re.compile(r"\s+")


def clean_text(raw: str) -> str:
    text = raw
    while True:
        stripped = _WHITESPACE.sub(" ", _PLACEHOLDER.sub("", text)).strip()
        if stripped == text:
            return text
        text = stripped


@dataclass(frozen=True)
class Candidate:
    para_id: str
    text: str


@dataclass(frozen=True)
class QueryCase:
    query_id: str
    query_text: str
    candidates: tuple[Candidate, ...]
    gold: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.candidates:
            raise ValueError(f"query {self.query_id!r} has no candidates")
        ids = {c.para_id for c in self.candidates}
        missing = self.gold - ids
        if missing:
            raise ValueError(f"query {self.query_id!r}: gold ids not among "
                             f"candidates: {sorted(missing)}")


def read_dataset(path: str | Path) -> list[QueryCase]:
    cases = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: malformed JSON: "
                                 f"{exc.msg}") from exc
            cases.append(QueryCase(
                query_id=record["query_id"],
                query_text=clean_text(record["query_text"]),
                candidates=tuple(
                    Candidate(c["para_id"], clean_text(c["text"]))
                    for c in record["candidates"]),
                gold=frozenset(record.get("gold", ())),
            ))
    return cases


def iter_pairs(cases: list[QueryCase]) -> Iterator[tuple[str, str, str, str]]:
    """(query_id, para_id, query_text, candidate_text) for every pair."""
    for case in cases:
        for cand in case.candidates:
            yield case.query_id, cand.para_id, case.query_text, cand.text


@dataclass(frozen=True)
class TrainSample:
    """One positive paragraph with its in-case negatives."""

    query_text: str
    positive_text: str
    negative_texts: tuple[str, ...]

    def __post_init__(self):
        if len(self.negative_texts) < 1:
            raise ValueError("a training sample needs at least one negative")


@dataclass(frozen=True)
class NeuralConfig:
    backbone: str = "tiny-encoder"
    max_sequence_length: int = 512
    query_budget: int = 128
    negatives: int = 7
    learning_rate: float = 1e-3
    epochs: int = 10
    batch_size: int = 8
    seed: int = 0

    def __post_init__(self):
        if not self.query_budget < self.max_sequence_length:
            raise ValueError("query_budget must be < max_sequence_length")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.learning_rate <= 0 or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("bad optimizer settings")

    def as_dict(self) -> dict:
        return {
            "backbone": self.backbone,
            "max_sequence_length": self.max_sequence_length,
            "query_budget": self.query_budget,
            "negatives": self.negatives,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
        }


def build_training_samples(cases: list[QueryCase],
                           cfg: NeuralConfig) -> list[TrainSample]:
    """One sample per (query, gold paragraph).

    Negatives are drawn uniformly without replacement from the same case's
    non-gold candidates, all of them when fewer than ``cfg.negatives``
    exist. Deterministic for a fixed seed. Queries without gold labels or
    without any negative are skipped.
    """
    rng = random.Random(cfg.seed)
    samples = []
    for case in cases:
        negatives = [c.text for c in case.candidates
                     if c.para_id not in case.gold]
        if not negatives:
            continue
        positives = [c.text for c in case.candidates if c.para_id in case.gold]
        for pos_text in positives:
            if len(negatives) <= cfg.negatives:
                chosen = list(negatives)
            else:
                chosen = rng.sample(negatives, cfg.negatives)
            samples.append(TrainSample(
                query_text=case.query_text,
                positive_text=pos_text,
                negative_texts=tuple(chosen)))
    return samples


def write_samples(samples: list[TrainSample], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps({
                "query_text": s.query_text,
                "positive_text": s.positive_text,
                "negative_texts": list(s.negative_texts),
            }, ensure_ascii=False, sort_keys=True) + "\n")


def read_samples(path: str | Path) -> list[TrainSample]:
    samples = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            samples.append(TrainSample(
                query_text=record["query_text"],
                positive_text=record["positive_text"],
                negative_texts=tuple(record["negative_texts"])))
    return samples
