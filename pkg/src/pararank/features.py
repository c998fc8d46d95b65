"""Feature matrix assembly: lengths, lexical scores, and external model scores.

External (neural) model scores arrive as score files (TSV lines of
``query_id <tab> para_id <tab> score``) and are treated as opaque per-pair
values. No normalization is applied: the downstream learner is tree-based,
so any strictly monotone rescaling of a feature leaves its splits intact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, NamedTuple, Sequence

from .corpus import Dataset, tokens_of
from .errors import IntegrityError, ParseError
from .util import format_float, sha256_text

DEFAULT_FEATURES: tuple[str, ...] = (
    "query_length",
    "candidate_length",
    "bm25",
    "qld",
    "bert_large",
    "roberta_large",
    "legal_bert_base",
    "deberta_v3_large",
    "monot5_3b",
)

LENGTH_FEATURES = ("query_length", "candidate_length")

MISSING_POLICIES = ("error", "fill_min")


@dataclass(frozen=True)
class FeatureSchema:
    names: tuple[str, ...] = DEFAULT_FEATURES

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise IntegrityError("feature names must be unique")
        if not self.names:
            raise IntegrityError("feature schema must be nonempty")

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def fingerprint(self) -> str:
        return sha256_text(",".join(self.names))


@dataclass(frozen=True)
class ScoreFile:
    """Per-pair scores from one external model."""

    model_name: str
    entries: dict[tuple[str, str], float]

    def __post_init__(self):
        for key, score in self.entries.items():
            if not math.isfinite(score):
                raise IntegrityError(
                    f"score file {self.model_name!r}: non-finite score for {key}")


def load_score_file(path: str | Path, model_name: str) -> ScoreFile:
    path = Path(path)
    entries: dict[tuple[str, str], float] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise ParseError(f"expected 3 tab-separated fields, got {len(parts)}",
                                 path=str(path), line=lineno)
            qid, pid, score_str = parts
            if (qid, pid) in entries:
                raise ParseError(f"duplicate entry ({qid!r}, {pid!r})",
                                 path=str(path), line=lineno)
            try:
                score = float(score_str)
            except ValueError as exc:
                raise ParseError(f"bad score {score_str!r}: {exc}",
                                 path=str(path), line=lineno) from exc
            if not math.isfinite(score):
                raise ParseError(f"non-finite score {score_str!r}",
                                 path=str(path), line=lineno)
            entries[(qid, pid)] = score
    return ScoreFile(model_name=model_name, entries=entries)


def write_score_file(score_file: ScoreFile, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for qid, pid in sorted(score_file.entries):
            fh.write(f"{qid}\t{pid}\t{format_float(score_file.entries[(qid, pid)])}\n")


class Row(NamedTuple):
    query_id: str
    para_id: str
    label: int | None
    values: tuple[float, ...]


@dataclass(frozen=True)
class FeatureMatrix:
    schema: FeatureSchema
    rows: tuple[Row, ...]

    def __post_init__(self):
        seen: set[tuple[str, str]] = set()
        width = len(self.schema)
        for row in self.rows:
            key = (row.query_id, row.para_id)
            if key in seen:
                raise IntegrityError(f"duplicate matrix row {key}")
            seen.add(key)
            if len(row.values) != width:
                raise IntegrityError(
                    f"row {key}: expected {width} values, got {len(row.values)}")
            if any(not math.isfinite(v) for v in row.values):
                raise IntegrityError(f"row {key}: non-finite feature value")
            if row.label not in (0, 1, None):
                raise IntegrityError(f"row {key}: label must be 0, 1 or absent")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def has_labels(self) -> bool:
        return bool(self.rows) and all(r.label is not None for r in self.rows)

    def grouped(self) -> list[tuple[str, list[int]]]:
        """Row indices per query, in first-appearance order."""
        order: list[str] = []
        groups: dict[str, list[int]] = {}
        for i, row in enumerate(self.rows):
            if row.query_id not in groups:
                order.append(row.query_id)
                groups[row.query_id] = []
            groups[row.query_id].append(i)
        return [(qid, groups[qid]) for qid in order]

    def value_arrays(self):
        """(X, y) as float64 numpy arrays; y is None unless fully labeled."""
        import numpy as np

        x = np.array([r.values for r in self.rows], dtype=np.float64)
        x = x.reshape(len(self.rows), len(self.schema))
        y = (np.array([r.label for r in self.rows], dtype=np.float64)
             if self.has_labels else None)
        return x, y


def _resolve_columns(schema: FeatureSchema,
                     lexical: Mapping[str, Mapping[tuple[str, str], float]],
                     score_files: Sequence[ScoreFile]):
    by_model: dict[str, ScoreFile] = {}
    for sf in score_files:
        if sf.model_name in by_model:
            raise IntegrityError(f"two score files named {sf.model_name!r}")
        by_model[sf.model_name] = sf
    columns = {}
    for name in schema.names:
        if name in LENGTH_FEATURES:
            continue
        if name in lexical:
            columns[name] = lexical[name]
        elif name in by_model:
            columns[name] = by_model[name].entries
        else:
            raise IntegrityError(
                f"feature {name!r} has no matching score source; "
                f"score files present: {sorted(by_model)}")
    return columns


def assemble_features(dataset: Dataset,
                      lexical: Mapping[str, Mapping[tuple[str, str], float]],
                      score_files: Sequence[ScoreFile] = (),
                      schema: FeatureSchema = FeatureSchema(),
                      missing_policy: str = "error",
                      with_labels: bool = True) -> FeatureMatrix:
    """One row per (query, candidate), feature values in schema order.

    ``lexical`` maps scorer name (bm25/qld) to per-pair scores. Under
    missing_policy="fill_min" an absent pair takes that column's minimum
    observed score minus 1; under "error" it aborts naming the triple.
    """
    if missing_policy not in MISSING_POLICIES:
        raise ValueError(f"missing_policy must be one of {MISSING_POLICIES}")
    columns = _resolve_columns(schema, lexical, score_files)
    fill_values = {}
    if missing_policy == "fill_min":
        for name, entries in columns.items():
            if entries:
                fill_values[name] = min(entries.values()) - 1.0

    rows = []
    for inst in dataset:
        q_len = float(len(tokens_of(inst.clean_query_text)))
        for para in inst.candidates:
            key = (inst.query_id, para.para_id)
            values = []
            for name in schema.names:
                if name == "query_length":
                    values.append(q_len)
                elif name == "candidate_length":
                    values.append(float(len(tokens_of(para.clean_text))))
                else:
                    entries = columns[name]
                    if key in entries:
                        values.append(entries[key])
                    elif missing_policy == "fill_min" and name in fill_values:
                        values.append(fill_values[name])
                    else:
                        raise IntegrityError(
                            f"missing score: feature {name!r}, query "
                            f"{inst.query_id!r}, paragraph {para.para_id!r}")
            label = (1 if para.para_id in inst.gold else 0) if with_labels else None
            rows.append(Row(inst.query_id, para.para_id, label, tuple(values)))
    return FeatureMatrix(schema=schema, rows=tuple(rows))


def write_matrix(matrix: FeatureMatrix, path: str | Path) -> None:
    """Header line '#schema: n1,n2,...' then one TSV row per pair."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("#schema: " + ",".join(matrix.schema.names) + "\n")
        for row in matrix.rows:
            label = "-" if row.label is None else str(row.label)
            values = "\t".join(format_float(v) for v in row.values)
            fh.write(f"{row.query_id}\t{row.para_id}\t{label}\t{values}\n")


def read_matrix(path: str | Path,
                expected_schema: FeatureSchema | None = None) -> FeatureMatrix:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("#schema: "):
            raise ParseError("missing '#schema: ' header", path=str(path), line=1)
        names = tuple(header[len("#schema: "):].strip().split(","))
        schema = FeatureSchema(names)
        if expected_schema is not None and schema != expected_schema:
            raise ParseError(
                f"schema mismatch: file has {names}, expected "
                f"{expected_schema.names}", path=str(path), line=1)
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3 + len(schema):
                raise ParseError(
                    f"expected {3 + len(schema)} fields, got {len(parts)}",
                    path=str(path), line=lineno)
            qid, pid, label_str = parts[:3]
            if label_str == "-":
                label = None
            elif label_str in ("0", "1"):
                label = int(label_str)
            else:
                raise ParseError(f"bad label {label_str!r}",
                                 path=str(path), line=lineno)
            try:
                values = tuple(float(v) for v in parts[3:])
            except ValueError as exc:
                raise ParseError(f"bad feature value: {exc}",
                                 path=str(path), line=lineno) from exc
            if any(not math.isfinite(v) for v in values):
                raise ParseError("non-finite feature value",
                                 path=str(path), line=lineno)
            rows.append(Row(qid, pid, label, values))
    return FeatureMatrix(schema=schema, rows=tuple(rows))
