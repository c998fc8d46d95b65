"""Tokenization, per-pool term statistics, and BM25 / query-likelihood scoring.

Candidates compete only within their own query case, so by default one
index is built per candidate pool. A global-collection mode (one index
over every paragraph in the dataset, used for collection statistics) is
available behind a flag for experiments.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import porter
from .corpus import Dataset, Paragraph, QueryInstance
from .errors import IntegrityError
from .evaluation import RankedRun, rank_candidates
from .util import parallel_map

# Maximal alphanumeric runs; underscore separates tokens.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

SCORER_NAMES = ("bm25", "qld")


@dataclass(frozen=True)
class AnalyzerConfig:
    """Deterministic text analysis settings.

    Stemming uses the bundled Porter stemmer and folds stemmed tokens to
    lowercase (the stemmer is defined on lowercase words).
    """

    lowercase: bool = True
    stemming: bool = True
    stopwords: frozenset[str] = frozenset()


def analyze(text: str, cfg: AnalyzerConfig = AnalyzerConfig()) -> list[str]:
    """Lowercase (optional), split on non-alphanumeric runs, drop stopwords, stem."""
    if cfg.lowercase:
        text = text.lower()
    tokens = _TOKEN_RE.findall(text)
    if cfg.stopwords:
        tokens = [t for t in tokens if t not in cfg.stopwords]
    if cfg.stemming:
        tokens = [porter.stem(t.lower()) for t in tokens]
    return tokens


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 0.9
    b: float = 0.4

    def __post_init__(self):
        if not self.k1 > 0:
            raise ValueError(f"k1 must be > 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


@dataclass(frozen=True)
class QldParams:
    """Dirichlet-prior smoothing; the document mixing weight is mu/(len(d)+mu)."""

    mu: float = 1000.0

    def __post_init__(self):
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be finite and > 0, got {self.mu}")


@dataclass(frozen=True)
class TermIndex:
    """Term and document statistics for one candidate pool."""

    num_docs: int
    doc_len: dict[str, int]
    avgdl: float
    postings: dict[str, tuple[tuple[str, int], ...]]
    df: dict[str, int]
    collection_tf: dict[str, int]
    collection_len: int
    _doc_tf: dict[str, dict[str, int]] = field(repr=False, default_factory=dict)

    def tf(self, term: str, doc_id: str) -> int:
        if doc_id not in self.doc_len:
            raise KeyError(f"unknown doc_id {doc_id!r}")
        return self._doc_tf[doc_id].get(term, 0)


def build_index(pool: Sequence[Paragraph], cfg: AnalyzerConfig = AnalyzerConfig()
                ) -> TermIndex:
    """Index one candidate pool; contents are independent of pool order."""
    if not pool:
        raise IntegrityError("cannot index an empty candidate pool")
    ids = [p.para_id for p in pool]
    if len(set(ids)) != len(ids):
        raise IntegrityError("duplicate para_id in candidate pool")

    docs = sorted(pool, key=lambda p: p.para_id)
    doc_tf: dict[str, dict[str, int]] = {}
    doc_len: dict[str, int] = {}
    for p in docs:
        tokens = analyze(p.clean_text, cfg)
        doc_tf[p.para_id] = dict(Counter(tokens))
        doc_len[p.para_id] = len(tokens)

    postings: dict[str, list[tuple[str, int]]] = {}
    collection_tf: Counter[str] = Counter()
    for doc_id in sorted(doc_tf):
        for term, tf in sorted(doc_tf[doc_id].items()):
            postings.setdefault(term, []).append((doc_id, tf))
            collection_tf[term] += tf

    n = len(docs)
    total_len = sum(doc_len.values())
    return TermIndex(
        num_docs=n,
        doc_len=doc_len,
        avgdl=total_len / n,
        postings={t: tuple(plist) for t, plist in sorted(postings.items())},
        df={t: len(plist) for t, plist in sorted(postings.items())},
        collection_tf=dict(sorted(collection_tf.items())),
        collection_len=total_len,
        _doc_tf=doc_tf,
    )


def idf(index: TermIndex, term: str) -> float:
    """Non-negative variant: ln(1 + (N - df + 0.5) / (df + 0.5))."""
    df = index.df.get(term, 0)
    return math.log(1.0 + (index.num_docs - df + 0.5) / (df + 0.5))


def bm25_score(index: TermIndex, query_tokens: Sequence[str], doc_id: str,
               params: Bm25Params = Bm25Params()) -> float:
    """Okapi BM25 with saturation k1 and length normalization b.

    Query tokens missing from the document contribute 0; repeated query
    tokens contribute once per occurrence.
    """
    if doc_id not in index.doc_len:
        raise KeyError(f"unknown doc_id {doc_id!r}")
    length_norm = index.doc_len[doc_id] / index.avgdl if index.avgdl > 0 else 0.0
    denom_base = params.k1 * (1.0 - params.b + params.b * length_norm)
    score = 0.0
    for term in query_tokens:
        tf = index.tf(term, doc_id)
        if tf == 0:
            continue
        score += idf(index, term) * tf * (params.k1 + 1.0) / (tf + denom_base)
    return score


def qld_score(index: TermIndex, query_tokens: Sequence[str], doc_id: str,
              params: QldParams = QldParams()) -> float:
    """Dirichlet-smoothed query likelihood, in the rank-equivalent form

        sum_t c(t,q) * ln(1 + c(t,d) / (mu * P(t|C))) + |q| * ln(mu / (len(d)+mu))

    with P(t|C) the collection unigram model. Query tokens absent from the
    whole collection have no smoothed probability and are dropped from the
    query (including from |q|).
    """
    if doc_id not in index.doc_len:
        raise KeyError(f"unknown doc_id {doc_id!r}")
    if index.collection_len == 0:
        raise IntegrityError("collection has no tokens; cannot smooth")
    mu = params.mu
    seen = [t for t in query_tokens if index.collection_tf.get(t, 0) > 0]
    score = 0.0
    for term, q_tf in sorted(Counter(seen).items()):
        p_coll = index.collection_tf[term] / index.collection_len
        score += q_tf * math.log1p(index.tf(term, doc_id) / (mu * p_coll))
    score += len(seen) * math.log(mu / (index.doc_len[doc_id] + mu))
    return score


def score_pool(index: TermIndex, query_tokens: Sequence[str], scorer: str,
               params: Bm25Params | QldParams | None = None,
               doc_ids: Iterable[str] | None = None) -> dict[str, float]:
    """Score every document (or the given ids) against one tokenized query."""
    if scorer == "bm25":
        params = params if params is not None else Bm25Params()
        fn = lambda d: bm25_score(index, query_tokens, d, params)
    elif scorer == "qld":
        params = params if params is not None else QldParams()
        fn = lambda d: qld_score(index, query_tokens, d, params)
    else:
        raise ValueError(f"unknown scorer {scorer!r}; expected one of {SCORER_NAMES}")
    ids = list(doc_ids) if doc_ids is not None else list(index.doc_len)
    return {d: fn(d) for d in ids}


def _global_doc_id(query_id: str, para_id: str) -> str:
    return f"{query_id}::{para_id}"


def build_global_index(dataset: Dataset, cfg: AnalyzerConfig = AnalyzerConfig()
                       ) -> TermIndex:
    """One index over every paragraph of every query (global-collection mode)."""
    pool = [
        Paragraph(para_id=_global_doc_id(q.query_id, p.para_id),
                  raw_text=p.raw_text, clean_text=p.clean_text)
        for q in dataset for p in q.candidates
    ]
    return build_index(pool, cfg)


def rank_lexical(instance: QueryInstance,
                 cfg: AnalyzerConfig = AnalyzerConfig(),
                 scorer: str = "bm25",
                 params: Bm25Params | QldParams | None = None,
                 global_index: TermIndex | None = None,
                 ) -> tuple[tuple[str, float], ...]:
    """Rank one query's candidates: descending score, ties by ascending para_id."""
    query_tokens = analyze(instance.clean_query_text, cfg)
    if global_index is None:
        index = build_index(instance.candidates, cfg)
        scores = score_pool(index, query_tokens, scorer, params)
    else:
        mapping = {_global_doc_id(instance.query_id, p.para_id): p.para_id
                   for p in instance.candidates}
        raw = score_pool(global_index, query_tokens, scorer, params,
                         doc_ids=mapping.keys())
        scores = {mapping[gid]: s for gid, s in raw.items()}
    return rank_candidates(scores)


def score_dataset(dataset: Dataset,
                  cfg: AnalyzerConfig = AnalyzerConfig(),
                  scorer: str = "bm25",
                  params: Bm25Params | QldParams | None = None,
                  global_scope: bool = False,
                  workers: int | None = None) -> dict[tuple[str, str], float]:
    """Score every (query, candidate) pair; keys are (query_id, para_id)."""
    global_index = build_global_index(dataset, cfg) if global_scope else None

    def one(instance: QueryInstance) -> list[tuple[tuple[str, str], float]]:
        ranked = rank_lexical(instance, cfg, scorer, params, global_index)
        return [((instance.query_id, pid), score) for pid, score in ranked]

    out: dict[tuple[str, str], float] = {}
    for chunk in parallel_map(one, dataset.instances, workers):
        out.update(chunk)
    return out


def run_from_scores(scores: Mapping[tuple[str, str], float]) -> RankedRun:
    """Group flat (query_id, para_id) -> score entries into a ranked run."""
    nested: dict[str, dict[str, float]] = {}
    for (qid, pid), score in scores.items():
        nested.setdefault(qid, {})[pid] = score
    return RankedRun.from_scores(nested)


def write_score_dump(scores: Mapping[tuple[str, str], float], scorer: str,
                     path) -> None:
    """TSV: query_id, para_id, scorer_name, score (diff-stable ordering)."""
    from .util import format_float
    with open(path, "w", encoding="utf-8") as fh:
        for (qid, pid) in sorted(scores):
            fh.write(f"{qid}\t{pid}\t{scorer}\t{format_float(scores[(qid, pid)])}\n")
