"""Boosted-tree model types and their JSON serialization.

Floats in the model document are written as shortest round-tripping
decimal strings, so a saved model reloads bit-exactly and reproduces its
training-time predictions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import IntegrityError, ParseError
from ..util import format_float
from . import kernels

OBJECTIVES = ("pointwise_logistic", "lambdarank_at_1")

MODEL_FORMAT = "pararank-gbdt"
MODEL_FORMAT_VERSION = 1

# Fixed L2 regularization on leaf values (Newton step denominator).
LEAF_L2 = 1.0


@dataclass(frozen=True)
class TrainConfig:
    objective: str = "pointwise_logistic"
    num_rounds: int = 500
    learning_rate: float = 0.1
    max_leaves: int = 31
    min_samples_leaf: int = 5
    early_stop_patience: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}, "
                             f"got {self.objective!r}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate must be in (0, 1], "
                             f"got {self.learning_rate}")
        if self.num_rounds < 1:
            raise ValueError("num_rounds must be >= 1")
        if not 1 <= self.early_stop_patience <= self.num_rounds:
            raise ValueError("early_stop_patience must be in [1, num_rounds]")
        if self.max_leaves < 2:
            raise ValueError("max_leaves must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")

    def as_dict(self) -> dict:
        return {
            "objective": self.objective,
            "num_rounds": self.num_rounds,
            "learning_rate": self.learning_rate,
            "max_leaves": self.max_leaves,
            "min_samples_leaf": self.min_samples_leaf,
            "early_stop_patience": self.early_stop_patience,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class Tree:
    """One regression tree as parallel node arrays; feature -1 marks a leaf."""

    feature: tuple[int, ...]
    threshold: tuple[float, ...]
    left: tuple[int, ...]
    right: tuple[int, ...]
    value: tuple[float, ...]
    default_left: tuple[bool, ...]

    def arrays(self):
        return (
            np.asarray(self.feature, dtype=np.int32),
            np.asarray(self.threshold, dtype=np.float64),
            np.asarray(self.left, dtype=np.int32),
            np.asarray(self.right, dtype=np.int32),
            np.asarray(self.default_left, dtype=np.uint8),
        )

    def leaf_values(self, x: np.ndarray) -> np.ndarray:
        feature, threshold, left, right, default_left = self.arrays()
        leaves = kernels.route_rows(np.ascontiguousarray(x, dtype=np.float64),
                                    feature, threshold, left, right,
                                    default_left)
        values = np.asarray(self.value, dtype=np.float64)
        return values[leaves]


@dataclass(frozen=True)
class GbdtModel:
    """Additive tree ensemble: base_score + learning_rate * sum of leaf values.

    ``trees`` is already truncated at the selected iteration, so
    best_iteration always equals len(trees).
    """

    trees: tuple[Tree, ...]
    base_score: float
    learning_rate: float
    schema_fingerprint: str
    best_iteration: int
    objective: str
    schema_names: tuple[str, ...]
    config_echo: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.best_iteration != len(self.trees):
            raise IntegrityError("best_iteration must equal the tree count")
        width = len(self.schema_names)
        for t, tree in enumerate(self.trees):
            if any(f >= width for f in tree.feature):
                raise IntegrityError(f"tree {t}: feature index out of schema")

    def predict_raw(self, x: np.ndarray) -> np.ndarray:
        """Raw scores, accumulated tree by tree exactly as during training."""
        raw = np.full(x.shape[0], self.base_score, dtype=np.float64)
        for tree in self.trees:
            raw += self.learning_rate * tree.leaf_values(x)
        return raw


@dataclass(frozen=True)
class TrainHistory:
    """Per-round (training objective, validation ndcg@1), 1-based rounds."""

    rounds: tuple[tuple[float, float], ...]
    best_iteration: int

    def __post_init__(self):
        if self.rounds:
            ndcgs = [v for _, v in self.rounds]
            best = max(ndcgs)
            expect = ndcgs.index(best) + 1
            if self.best_iteration != expect:
                raise IntegrityError(
                    f"best_iteration {self.best_iteration} is not the earliest "
                    f"argmax of validation ndcg@1 (expected {expect})")
        elif self.best_iteration != 0:
            raise IntegrityError("empty history requires best_iteration 0")

    @property
    def validation_ndcg(self) -> list[float]:
        return [v for _, v in self.rounds]

    @property
    def train_objective(self) -> list[float]:
        return [v for v, _ in self.rounds]


def _tree_to_doc(tree: Tree) -> dict:
    return {
        "feature": list(tree.feature),
        "threshold": [format_float(v) for v in tree.threshold],
        "left": list(tree.left),
        "right": list(tree.right),
        "value": [format_float(v) for v in tree.value],
        "default_left": [int(b) for b in tree.default_left],
    }


def _tree_from_doc(doc: dict) -> Tree:
    return Tree(
        feature=tuple(int(v) for v in doc["feature"]),
        threshold=tuple(float(v) for v in doc["threshold"]),
        left=tuple(int(v) for v in doc["left"]),
        right=tuple(int(v) for v in doc["right"]),
        value=tuple(float(v) for v in doc["value"]),
        default_left=tuple(bool(v) for v in doc["default_left"]),
    )


def model_to_json(model: GbdtModel) -> str:
    doc = {
        "format": MODEL_FORMAT,
        "format_version": MODEL_FORMAT_VERSION,
        "objective": model.objective,
        "base_score": format_float(model.base_score),
        "learning_rate": format_float(model.learning_rate),
        "schema_fingerprint": model.schema_fingerprint,
        "schema_names": list(model.schema_names),
        "best_iteration": model.best_iteration,
        "config": model.config_echo,
        "trees": [_tree_to_doc(t) for t in model.trees],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def model_from_json(text: str, *, path: str | None = None) -> GbdtModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed model JSON: {exc.msg}", path=path) from exc
    if doc.get("format") != MODEL_FORMAT:
        raise ParseError(f"not a {MODEL_FORMAT} document", path=path)
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ParseError(f"unsupported format_version "
                         f"{doc.get('format_version')!r}", path=path)
    return GbdtModel(
        trees=tuple(_tree_from_doc(t) for t in doc["trees"]),
        base_score=float(doc["base_score"]),
        learning_rate=float(doc["learning_rate"]),
        schema_fingerprint=doc["schema_fingerprint"],
        best_iteration=int(doc["best_iteration"]),
        objective=doc["objective"],
        schema_names=tuple(doc["schema_names"]),
        config_echo=doc.get("config", {}),
    )


def save_model(model: GbdtModel, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model), encoding="utf-8")


def load_model(path: str | Path) -> GbdtModel:
    return model_from_json(Path(path).read_text(encoding="utf-8"),
                           path=str(path))
