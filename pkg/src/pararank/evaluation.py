"""Ranked runs, answer selection, and micro-averaged P/R/F1 at a cutoff.

Counts are pooled over all queries before forming ratios (micro-averaging):
tp is the number of predicted paragraphs that are gold, fp the rest of the
predictions, fn the gold paragraphs never predicted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import IntegrityError, ParseError
from .util import format_float


def rank_candidates(scores: Mapping[str, float]) -> tuple[tuple[str, float], ...]:
    """Order one query's candidates: descending score, ties by ascending para_id."""
    return tuple(sorted(scores.items(), key=lambda kv: (-kv[1], kv[0])))


@dataclass(frozen=True)
class RankedRun:
    """Per-query ordered candidate lists. Construct via from_scores()."""

    queries: dict[str, tuple[tuple[str, float], ...]]

    def __post_init__(self):
        for qid, entries in self.queries.items():
            pids = [pid for pid, _ in entries]
            if len(set(pids)) != len(pids):
                raise IntegrityError(f"query {qid!r}: duplicate para_ids in run")
            for pid, score in entries:
                if not math.isfinite(score):
                    raise IntegrityError(
                        f"query {qid!r}, paragraph {pid!r}: non-finite score")
            if list(entries) != sorted(entries, key=lambda kv: (-kv[1], kv[0])):
                raise IntegrityError(f"query {qid!r}: run entries out of order")

    @classmethod
    def from_scores(cls, scores: Mapping[str, Mapping[str, float]]) -> "RankedRun":
        return cls({qid: rank_candidates(per_query)
                    for qid, per_query in scores.items()})

    def query_ids(self) -> list[str]:
        return sorted(self.queries)

    def __len__(self) -> int:
        return len(self.queries)


@dataclass(frozen=True)
class Selection:
    """Predicted para_ids per query; every query predicts at least one."""

    queries: dict[str, frozenset[str]]

    def __post_init__(self):
        for qid, pids in self.queries.items():
            if not pids:
                raise IntegrityError(f"query {qid!r}: empty selection")

    def __len__(self) -> int:
        return len(self.queries)


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "EvalReport":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall else 0.0)
        return cls(tp=tp, fp=fp, fn=fn,
                   precision=precision, recall=recall, f1=f1)

    def as_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn,
                "precision": self.precision, "recall": self.recall,
                "f1": self.f1}

    def format_table(self) -> str:
        lines = [
            f"{'tp':>10}  {self.tp}",
            f"{'fp':>10}  {self.fp}",
            f"{'fn':>10}  {self.fn}",
            f"{'precision':>10}  {self.precision:.4f}",
            f"{'recall':>10}  {self.recall:.4f}",
            f"{'f1':>10}  {self.f1:.4f}",
        ]
        return "\n".join(lines)


def select_top_k(run: RankedRun, k: int = 1) -> Selection:
    """Predict each query's k highest-ranked paragraphs (fewer if pool < k)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return Selection({
        qid: frozenset(pid for pid, _ in entries[:k])
        for qid, entries in run.queries.items()
    })


def select_threshold(run: RankedRun, alpha: float) -> Selection:
    """Predict the top paragraph plus any scoring >= alpha * top score.

    Allows multi-answer predictions while always keeping the top-1 choice.
    With negative top scores the cutoff lies above the top score, so only
    the top paragraph survives.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    picked = {}
    for qid, entries in run.queries.items():
        if not entries:
            continue
        top_pid, top_score = entries[0]
        cutoff = alpha * top_score
        chosen = {pid for pid, score in entries if score >= cutoff}
        chosen.add(top_pid)
        picked[qid] = frozenset(chosen)
    return Selection(picked)


def evaluate(selection: Selection,
             gold: Mapping[str, frozenset[str] | set[str]]) -> EvalReport:
    """Micro-averaged precision/recall/F1 of a selection against gold sets.

    Every selected query must appear in ``gold``. Queries whose gold set is
    empty (unlabeled test data) are skipped with a warning instead of being
    scored as all-false-positive.
    """
    tp = fp = fn = 0
    skipped = []
    for qid, predicted in sorted(selection.queries.items()):
        if qid not in gold:
            raise IntegrityError(f"query {qid!r} has no gold entry")
        gold_set = set(gold[qid])
        if not gold_set:
            skipped.append(qid)
            continue
        tp += len(predicted & gold_set)
        fp += len(predicted - gold_set)
        fn += len(gold_set - predicted)
    if skipped:
        warnings.warn(
            f"skipped {len(skipped)} queries with empty gold sets: "
            f"{skipped[:5]}{'...' if len(skipped) > 5 else ''}",
            stacklevel=2)
    return EvalReport.from_counts(tp, fp, fn)


def write_run_file(run: RankedRun, path: str | Path) -> None:
    """TSV: query_id, para_id, rank (1-based), score."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for qid in sorted(run.queries):
            for rank, (pid, score) in enumerate(run.queries[qid], start=1):
                fh.write(f"{qid}\t{pid}\t{rank}\t{format_float(score)}\n")


def read_run_file(path: str | Path) -> RankedRun:
    path = Path(path)
    per_query: dict[str, list[tuple[str, float]]] = {}
    seen: set[tuple[str, str]] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise ParseError(f"expected 4 tab-separated fields, got {len(parts)}",
                                 path=str(path), line=lineno)
            qid, pid, rank_str, score_str = parts
            if (qid, pid) in seen:
                raise ParseError(f"duplicate entry ({qid!r}, {pid!r})",
                                 path=str(path), line=lineno)
            seen.add((qid, pid))
            try:
                rank = int(rank_str)
                score = float(score_str)
            except ValueError as exc:
                raise ParseError(f"bad rank/score: {exc}",
                                 path=str(path), line=lineno) from exc
            if not math.isfinite(score):
                raise ParseError(f"non-finite score {score_str!r}",
                                 path=str(path), line=lineno)
            entries = per_query.setdefault(qid, [])
            if rank != len(entries) + 1:
                raise ParseError(
                    f"rank {rank} out of sequence for query {qid!r}",
                    path=str(path), line=lineno)
            entries.append((pid, score))
    return RankedRun({qid: tuple(entries) for qid, entries in per_query.items()})


def write_selection_file(selection: Selection, path: str | Path) -> None:
    """TSV of query_id and para_id, one line per predicted paragraph."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for qid in sorted(selection.queries):
            for pid in sorted(selection.queries[qid]):
                fh.write(f"{qid}\t{pid}\n")


def read_selection_file(path: str | Path) -> Selection:
    path = Path(path)
    per_query: dict[str, set[str]] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise ParseError(f"expected 2 tab-separated fields, got {len(parts)}",
                                 path=str(path), line=lineno)
            qid, pid = parts
            if pid in per_query.get(qid, ()):
                raise ParseError(f"duplicate entry ({qid!r}, {pid!r})",
                                 path=str(path), line=lineno)
            per_query.setdefault(qid, set()).add(pid)
    return Selection({qid: frozenset(pids) for qid, pids in per_query.items()})
