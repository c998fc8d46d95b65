"""pararank: a paragraph ranking toolkit for legal case entailment.

Pipeline stages: ingest query cases with candidate paragraph pools, score
candidates lexically (BM25, Dirichlet-smoothed query likelihood), assemble
a feature matrix together with external model score files, train a
gradient-boosted learning-to-rank ensemble with ndcg@1 early stopping,
select top-k answers, and report micro-averaged P/R/F1.
"""

__version__ = "0.1.0"

from . import corpus, evaluation, features, lexical, ltr

__all__ = ["corpus", "evaluation", "features", "lexical", "ltr", "__version__"]
