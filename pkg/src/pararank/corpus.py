"""Dataset ingestion, placeholder cleanup, statistics, and splits.

A dataset is a list of query instances; each instance pairs one query text
(the decision fragment) with the candidate paragraphs of its supporting
case and, for labeled data, the ids of the entailing paragraphs.

The canonical interchange format is JSONL: one object per line with fields
``query_id``, ``query_text``, ``candidates`` (array of ``{para_id, text}``)
and optional ``gold`` (array of para_id). A directory adapter for
COLIEE-style trees (one folder per query, a query text file plus a folder
of numbered paragraph files) is provided as well.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, IntegrityError, ParseError
from .util import parallel_map

# Matches uppercase placeholder tokens such as FRAGMENT_SUPPRESSED,
# REFERENCE_SUPPRESSED, CITATION_SUPPRESSED and misspellings like
# FRAGMANT_SUPPRESSED.
DEFAULT_PLACEHOLDER_PATTERNS: tuple[str, ...] = (r"\b[A-Z][A-Z_]*SUPPRESSED\b",)

SPLIT_TAGS = ("train", "valid", "test", "custom")

_WHITESPACE_RUN = re.compile(r"\s+")


def _compile_patterns(patterns: Iterable[str]) -> list[re.Pattern[str]]:
    compiled = []
    for pat in patterns:
        try:
            compiled.append(re.compile(pat))
        except re.error as exc:
            raise ConfigError(f"invalid placeholder pattern {pat!r}: {exc}") from exc
    return compiled


def clean_text(raw: str, patterns: Sequence[str] = DEFAULT_PLACEHOLDER_PATTERNS) -> str:
    """Delete every placeholder match and collapse whitespace runs.

    Deletion is iterated to a fixed point so the result never contains a
    pattern match, even when a deletion splices a new one together; this
    also makes the function idempotent.
    """
    compiled = _compile_patterns(patterns)
    text = raw
    while True:
        stripped = text
        for pat in compiled:
            stripped = pat.sub("", stripped)
        stripped = _WHITESPACE_RUN.sub(" ", stripped).strip()
        if stripped == text:
            return text
        text = stripped


def tokens_of(clean: str) -> list[str]:
    """Whitespace tokens of already-cleaned text (the dataset length unit)."""
    return clean.split()


@dataclass(frozen=True)
class Paragraph:
    """One candidate paragraph of a supporting case."""

    para_id: str
    raw_text: str
    clean_text: str

    @classmethod
    def make(cls, para_id: str, raw_text: str,
             patterns: Sequence[str] = DEFAULT_PLACEHOLDER_PATTERNS) -> "Paragraph":
        if not para_id:
            raise IntegrityError("paragraph id must be nonempty")
        return cls(para_id=para_id, raw_text=raw_text,
                   clean_text=clean_text(raw_text, patterns))


@dataclass(frozen=True)
class QueryInstance:
    """One query case: decision fragment plus its candidate paragraph pool."""

    query_id: str
    query_text: str
    clean_query_text: str
    candidates: tuple[Paragraph, ...]
    gold: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.candidates:
            raise IntegrityError(f"query {self.query_id!r} has no candidates")
        ids = [p.para_id for p in self.candidates]
        if len(set(ids)) != len(ids):
            raise IntegrityError(f"query {self.query_id!r} has duplicate para_ids")
        unknown = self.gold - set(ids)
        if unknown:
            raise IntegrityError(
                f"query {self.query_id!r}: gold ids not among candidates: "
                f"{sorted(unknown)}")

    @property
    def para_ids(self) -> list[str]:
        return [p.para_id for p in self.candidates]


@dataclass(frozen=True)
class Dataset:
    instances: tuple[QueryInstance, ...]
    split_tag: str = "custom"

    def __post_init__(self):
        if self.split_tag not in SPLIT_TAGS:
            raise ConfigError(f"unknown split tag {self.split_tag!r}")
        ids = [q.query_id for q in self.instances]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise IntegrityError(f"duplicate query_ids: {dupes}")

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)


@dataclass(frozen=True)
class StatsReport:
    num_queries: int
    avg_candidates_per_query: float
    avg_positives_per_query: float
    avg_query_length: float
    avg_candidate_length: float

    def as_dict(self) -> dict:
        return {
            "num_queries": self.num_queries,
            "avg_candidates_per_query": self.avg_candidates_per_query,
            "avg_positives_per_query": self.avg_positives_per_query,
            "avg_query_length": self.avg_query_length,
            "avg_candidate_length": self.avg_candidate_length,
        }


def _instance_from_record(record: dict, patterns: Sequence[str],
                          where: str) -> QueryInstance:
    try:
        query_id = record["query_id"]
        query_text = record["query_text"]
        raw_candidates = record["candidates"]
    except KeyError as exc:
        raise ParseError(f"missing field {exc.args[0]!r}", path=where) from exc
    candidates = tuple(
        Paragraph.make(c["para_id"], c["text"], patterns) for c in raw_candidates)
    return QueryInstance(
        query_id=query_id,
        query_text=query_text,
        clean_query_text=clean_text(query_text, patterns),
        candidates=candidates,
        gold=frozenset(record.get("gold", ())),
    )


def ingest_jsonl(path: str | Path, *,
                 patterns: Sequence[str] = DEFAULT_PLACEHOLDER_PATTERNS,
                 split_tag: str = "custom",
                 workers: int | None = None) -> Dataset:
    """Read one dataset from a JSONL file, cleaning all texts."""
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed JSON: {exc.msg}",
                                 path=str(path), line=lineno) from exc
            if not isinstance(record, dict):
                raise ParseError("line is not a JSON object",
                                 path=str(path), line=lineno)
            records.append((lineno, record))

    def build(item):
        lineno, record = item
        return _instance_from_record(record, patterns, f"{path}:{lineno}")

    instances = tuple(parallel_map(build, records, workers))
    return Dataset(instances=instances, split_tag=split_tag)


def write_jsonl(dataset: Dataset, path: str | Path) -> None:
    """Serialize raw texts; cleaning is re-applied on ingest."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for inst in dataset:
            record = {
                "query_id": inst.query_id,
                "query_text": inst.query_text,
                "candidates": [
                    {"para_id": p.para_id, "text": p.raw_text}
                    for p in inst.candidates
                ],
            }
            if inst.gold:
                record["gold"] = sorted(inst.gold)
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def ingest_coliee_dir(root: str | Path, labels: str | Path | None = None, *,
                      query_filename: str = "query.txt",
                      paragraphs_dirname: str = "paragraphs",
                      patterns: Sequence[str] = DEFAULT_PLACEHOLDER_PATTERNS,
                      split_tag: str = "custom",
                      workers: int | None = None) -> Dataset:
    """Read a COLIEE-style directory tree.

    ``root`` holds one subdirectory per query; each contains the query text
    file and a subdirectory of paragraph files whose stems become para_ids.
    ``labels``, when given, is a JSON file mapping query_id to a list of
    paragraph filenames or stems.
    """
    root = Path(root)
    if not root.is_dir():
        raise ConfigError(f"not a directory: {root}")

    gold_map: dict[str, list[str]] = {}
    if labels is not None:
        labels = Path(labels)
        try:
            gold_map = json.loads(labels.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed label file: {exc.msg}",
                             path=str(labels)) from exc

    query_dirs = sorted(d for d in root.iterdir() if d.is_dir())

    def build(qdir: Path) -> QueryInstance:
        query_id = qdir.name
        qfile = qdir / query_filename
        if not qfile.is_file():
            raise IntegrityError(f"query {query_id!r}: missing {query_filename}")
        query_text = qfile.read_text(encoding="utf-8")
        pdir = qdir / paragraphs_dirname
        if not pdir.is_dir():
            raise IntegrityError(
                f"query {query_id!r}: missing {paragraphs_dirname}/ directory")
        para_files = sorted(p for p in pdir.iterdir() if p.is_file())
        if not para_files:
            raise IntegrityError(f"query {query_id!r}: no candidate paragraphs")
        candidates = tuple(
            Paragraph.make(p.stem, p.read_text(encoding="utf-8"), patterns)
            for p in para_files)
        gold = frozenset(Path(name).stem for name in gold_map.get(query_id, ()))
        return QueryInstance(
            query_id=query_id,
            query_text=query_text,
            clean_query_text=clean_text(query_text, patterns),
            candidates=candidates,
            gold=gold,
        )

    instances = tuple(parallel_map(build, query_dirs, workers))
    known = {q.query_id for q in instances}
    stray = set(gold_map) - known
    if stray:
        raise IntegrityError(f"label file references unknown queries: {sorted(stray)}")
    return Dataset(instances=instances, split_tag=split_tag)


def dataset_stats(dataset: Dataset) -> StatsReport:
    """Averages over queries; lengths are whitespace-token counts of clean text."""
    n = len(dataset)
    if n == 0:
        return StatsReport(0, 0.0, 0.0, 0.0, 0.0)
    total_candidates = sum(len(q.candidates) for q in dataset)
    total_positives = sum(len(q.gold) for q in dataset)
    total_query_tokens = sum(len(tokens_of(q.clean_query_text)) for q in dataset)
    total_cand_tokens = sum(
        len(tokens_of(p.clean_text)) for q in dataset for p in q.candidates)
    return StatsReport(
        num_queries=n,
        avg_candidates_per_query=total_candidates / n,
        avg_positives_per_query=total_positives / n,
        avg_query_length=total_query_tokens / n,
        avg_candidate_length=total_cand_tokens / total_candidates,
    )


def split_validation(dataset: Dataset, n: int, seed: int) -> tuple[Dataset, Dataset]:
    """Partition into (rest, n validation queries) by seeded uniform sampling.

    Instance order inside each part follows the input dataset, so the same
    seed always yields bit-identical partitions.
    """
    total = len(dataset)
    if not 0 < n < total:
        raise ConfigError(
            f"validation size must satisfy 0 < n < {total}, got {n}")
    rng = random.Random(seed)
    valid_idx = set(rng.sample(range(total), n))
    train = tuple(q for i, q in enumerate(dataset) if i not in valid_idx)
    valid = tuple(q for i, q in enumerate(dataset) if i in valid_idx)
    return (Dataset(train, split_tag="train"), Dataset(valid, split_tag="valid"))
