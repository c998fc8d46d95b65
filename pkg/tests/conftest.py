import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for `import naive`

from pararank.corpus import Paragraph
from pararank.features import FeatureMatrix, FeatureSchema, Row

FIXTURES = Path(__file__).parent / "fixtures"

NINE_FEATURES = FeatureSchema(tuple(f"f{i}" for i in range(9)))


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def random_micro_corpus(rng: np.random.Generator):
    """<= 8 docs over a <= 10-letter vocab, doc length <= 12, 1-3 term query."""
    vocab = list("abcdefghij")[: int(rng.integers(3, 11))]
    n_docs = int(rng.integers(2, 9))
    docs = {}
    for d in range(n_docs):
        length = int(rng.integers(1, 13))
        docs[f"d{d}"] = [vocab[int(i)] for i in rng.integers(0, len(vocab), length)]
    query = [vocab[int(i)] for i in rng.integers(0, len(vocab), int(rng.integers(1, 4)))]
    if rng.random() < 0.25:
        query.append("zonk")  # token unseen in any document
    return docs, query


def pool_of(docs: dict[str, list[str]]) -> list[Paragraph]:
    return [Paragraph.make(doc_id, " ".join(tokens))
            for doc_id, tokens in docs.items()]


def separable_matrix(n_queries: int, tag: str, rng: np.random.Generator,
                     signal: int = 3, n_lo: int = 5, n_hi: int = 15
                     ) -> FeatureMatrix:
    """Gold candidate = within-query argmax of the signal feature.

    The gold row's signal value is drawn above the noise range, so the
    argmax is unique and the relationship is learnable pointwise.
    """
    rows = []
    for q in range(n_queries):
        qid = f"{tag}{q:03d}"
        n = int(rng.integers(n_lo, n_hi))
        feats = rng.uniform(0.0, 1.0, size=(n, 9))
        gold = int(rng.integers(0, n))
        feats[gold, signal] = rng.uniform(1.05, 2.0)
        for c in range(n):
            rows.append(Row(qid, f"p{c:03d}", 1 if c == gold else 0,
                            tuple(feats[c])))
    return FeatureMatrix(NINE_FEATURES, tuple(rows))


def drifted_matrices(seed: int = 0):
    """Train gold follows a mixed signal, validation gold a pure one, so the
    validation ndcg@1 curve rises, peaks, then degrades as boosting fits
    the mixture ever more closely."""
    rng = np.random.default_rng(seed)

    def gen(n_queries, tag, label_fn):
        rows = []
        for q in range(n_queries):
            qid = f"{tag}{q:03d}"
            n = int(rng.integers(6, 12))
            feats = rng.uniform(0.0, 1.0, size=(n, 9))
            gold = label_fn(feats)
            for c in range(n):
                rows.append(Row(qid, f"p{c:03d}", 1 if c == gold else 0,
                                tuple(feats[c])))
        return FeatureMatrix(NINE_FEATURES, tuple(rows))

    train = gen(60, "tr", lambda f: int(np.argmax(0.6 * f[:, 3] + 0.4 * f[:, 5])))
    valid = gen(40, "va", lambda f: int(np.argmax(f[:, 3])))
    return train, valid


def gold_of_matrix(matrix: FeatureMatrix) -> dict[str, set[str]]:
    gold: dict[str, set[str]] = {}
    for row in matrix.rows:
        gold.setdefault(row.query_id, set())
        if row.label == 1:
            gold[row.query_id].add(row.para_id)
    return gold
