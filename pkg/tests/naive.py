"""Independent reference implementations used as test oracles.

These recompute scores directly from token lists (no TermIndex, no shared
code with the library), so they stay honest checks of the real scorers.
"""

from __future__ import annotations

import math


def naive_bm25(docs: dict[str, list[str]], query: list[str], doc_id: str,
               k1: float = 0.9, b: float = 0.4) -> float:
    n = len(docs)
    avgdl = sum(len(toks) for toks in docs.values()) / n
    tokens = docs[doc_id]
    score = 0.0
    for term in query:
        tf = tokens.count(term)
        if tf == 0:
            continue
        df = sum(1 for toks in docs.values() if term in toks)
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        norm = k1 * (1.0 - b + b * len(tokens) / avgdl)
        score += idf * tf * (k1 + 1.0) / (tf + norm)
    return score


def naive_qld_direct(docs: dict[str, list[str]], query: list[str],
                     doc_id: str, mu: float = 1000.0) -> float:
    """Smoothed log-likelihood evaluated literally:

        log p(q|d) = sum_{c(q_i;d)>0} log(p_s(q_i|d) / (a_d p(q_i|C)))
                     + n log a_d + sum_i log p(q_i|C)

    with p_s(t|d) = (c(t,d) + mu p(t|C)) / (len(d) + mu) and
    a_d = mu / (len(d) + mu). Query tokens absent from the collection are
    dropped, matching the library's smoothing-free term dropout.
    """
    collection = [tok for toks in docs.values() for tok in toks]
    clen = len(collection)
    tokens = docs[doc_id]
    kept = [t for t in query if collection.count(t) > 0]
    alpha = mu / (len(tokens) + mu)
    score = 0.0
    for term in kept:
        c_d = tokens.count(term)
        if c_d == 0:
            continue
        p_coll = collection.count(term) / clen
        p_smooth = (c_d + mu * p_coll) / (len(tokens) + mu)
        score += math.log(p_smooth / (alpha * p_coll))
    score += len(kept) * math.log(alpha)
    score += sum(math.log(collection.count(t) / clen) for t in kept)
    return score


def naive_qld_query_constant(docs: dict[str, list[str]], query: list[str],
                             mu: float = 1000.0) -> float:
    """The document-independent part of the direct form: sum_i log p(q_i|C)."""
    collection = [tok for toks in docs.values() for tok in toks]
    clen = len(collection)
    kept = [t for t in query if collection.count(t) > 0]
    return sum(math.log(collection.count(t) / clen) for t in kept)


def naive_qld(docs: dict[str, list[str]], query: list[str], doc_id: str,
              mu: float = 1000.0) -> float:
    """Index-free recount of the rank-equivalent computational form."""
    collection = [tok for toks in docs.values() for tok in toks]
    clen = len(collection)
    tokens = docs[doc_id]
    kept = [t for t in query if collection.count(t) > 0]
    score = 0.0
    for term in sorted(set(kept)):
        p_coll = collection.count(term) / clen
        score += kept.count(term) * math.log(
            1.0 + tokens.count(term) / (mu * p_coll))
    score += len(kept) * math.log(mu / (len(tokens) + mu))
    return score
