"""Score-file emission and scorer persistence.

The output TSV, ``query_id <tab> para_id <tab> score``, is the contract
the ranking pipeline's feature assembly consumes; every (query, candidate)
pair of the dataset appears exactly once.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch

from .cross_encoder import CrossEncoderScorer
from .data import NeuralConfig, QueryCase, iter_pairs
from .seq2seq import Seq2SeqScorer

_KINDS = {"cross-encoder": CrossEncoderScorer, "seq2seq": Seq2SeqScorer}


def emit_score_file(cases: list[QueryCase], scorer, model_name: str,
                    path: str | Path, batch_size: int = 64) -> int:
    """Scores every pair and writes the TSV; returns the line count."""
    entries = list(iter_pairs(cases))
    entries.sort(key=lambda e: (e[0], e[1]))
    scores = []
    for start in range(0, len(entries), batch_size):
        chunk = entries[start:start + batch_size]
        scores.extend(scorer.score_batch([(q, c) for _, _, q, c in chunk]))
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for (qid, pid, _, _), score in zip(entries, scores):
            fh.write(f"{qid}\t{pid}\t{score!r}\n")
    return len(entries)


def save_scorer(scorer, path: str | Path) -> None:
    kind = next(k for k, cls in _KINDS.items() if isinstance(scorer, cls))
    torch.save({
        "kind": kind,
        "config": scorer.cfg.as_dict(),
        "state_dict": scorer.state_dict(),
    }, path)


def load_scorer(path: str | Path):
    payload = torch.load(path, map_location="cpu", weights_only=False)
    cls = _KINDS[payload["kind"]]
    scorer = cls(NeuralConfig(**payload["config"]))
    scorer.load_state_dict(payload["state_dict"])
    scorer.eval()
    return scorer


def describe(path: str | Path) -> str:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    return json.dumps({"kind": payload["kind"], "config": payload["config"]},
                      indent=2, sort_keys=True)
