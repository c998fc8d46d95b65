"""Gradient-boosted regression-tree training with ndcg@1 early stopping.

Trees grow best-first (highest split gain next) up to a leaf budget, with
exact greedy splits over all feature thresholds and second-order (Newton)
leaf values -sum(g)/(sum(h)+l2). Training runs until the validation ndcg@1
has not improved for ``early_stop_patience`` rounds, then the ensemble is
truncated at the best round seen. Everything is deterministic for a fixed
config: ties in split gain fall to the earlier feature/boundary, ties in
ranking to the lower para_id.
"""

from __future__ import annotations

import heapq
import itertools
import warnings
from typing import Mapping, Sequence

import numpy as np

from ..errors import IntegrityError
from ..evaluation import RankedRun
from ..features import FeatureMatrix
from . import kernels
from .model import LEAF_L2, GbdtModel, TrainConfig, TrainHistory, Tree

_BASE_CLIP = 1e-6


def _stable_sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _fit_tree(x: np.ndarray, grad: np.ndarray, hess: np.ndarray,
              max_leaves: int, min_leaf: int) -> tuple[Tree, np.ndarray]:
    """One tree on the current gradients; returns it plus per-row leaf values."""
    n, n_features = x.shape
    feature = [-1]
    threshold = [0.0]
    left = [-1]
    right = [-1]
    default_left = [True]
    node_rows: dict[int, np.ndarray] = {0: np.arange(n)}
    node_totals = {0: (float(np.sum(grad)), float(np.sum(hess)))}
    heap: list[tuple[float, int, int, int, int]] = []
    tiebreak = itertools.count()

    def consider(nid: int) -> None:
        idx = node_rows[nid]
        if idx.shape[0] < 2 * min_leaf:
            return
        g_total, h_total = node_totals[nid]
        best_gain = 0.0
        best: tuple[int, int] | None = None
        for f in range(n_features):
            col = x[idx, f]
            order = np.argsort(col, kind="stable")
            vals = np.ascontiguousarray(col[order])
            g = np.ascontiguousarray(grad[idx[order]])
            h = np.ascontiguousarray(hess[idx[order]])
            gain, pos = kernels.scan_split(vals, g, h, g_total, h_total,
                                           LEAF_L2, min_leaf)
            if pos >= 0 and gain > best_gain:
                best_gain = gain
                best = (f, pos)
        if best is not None:
            heapq.heappush(heap, (-best_gain, next(tiebreak), nid, *best))

    consider(0)
    leaves = 1
    while heap and leaves < max_leaves:
        _, _, nid, f, pos = heapq.heappop(heap)
        idx = node_rows.pop(nid)
        order = np.argsort(x[idx, f], kind="stable")
        sorted_idx = idx[order]
        lid = len(feature)
        rid = lid + 1
        feature[nid] = f
        threshold[nid] = float(x[sorted_idx[pos], f])
        left[nid] = lid
        right[nid] = rid
        for _ in range(2):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            default_left.append(True)
        left_idx = np.sort(sorted_idx[:pos + 1])
        right_idx = np.sort(sorted_idx[pos + 1:])
        node_rows[lid] = left_idx
        node_rows[rid] = right_idx
        node_totals[lid] = (float(np.sum(grad[left_idx])),
                            float(np.sum(hess[left_idx])))
        node_totals[rid] = (float(np.sum(grad[right_idx])),
                            float(np.sum(hess[right_idx])))
        leaves += 1
        consider(lid)
        consider(rid)

    value = [0.0] * len(feature)
    row_values = np.zeros(n, dtype=np.float64)
    for nid, idx in node_rows.items():
        g_total, h_total = node_totals[nid]
        leaf = -g_total / (h_total + LEAF_L2)
        value[nid] = leaf
        row_values[idx] = leaf
    tree = Tree(feature=tuple(feature), threshold=tuple(threshold),
                left=tuple(left), right=tuple(right), value=tuple(value),
                default_left=tuple(default_left))
    return tree, row_values


def _groups(matrix: FeatureMatrix) -> list[tuple[str, np.ndarray, list[str]]]:
    return [
        (qid, np.asarray(idxs, dtype=np.intp),
         [matrix.rows[i].para_id for i in idxs])
        for qid, idxs in matrix.grouped()
    ]


def _top_row(raw: np.ndarray, rows: np.ndarray, pids: list[str]) -> int:
    """Row index of the query's rank-1 candidate (max score, ties by para_id)."""
    scores = raw[rows]
    k = min(range(len(pids)), key=lambda i: (-scores[i], pids[i]))
    return int(rows[k])


def _ndcg_at_1_rows(raw: np.ndarray, groups, y: np.ndarray) -> float:
    if not groups:
        raise IntegrityError("cannot compute ndcg@1 of an empty run")
    hits = sum(1.0 for _, rows, pids in groups
               if y[_top_row(raw, rows, pids)] == 1)
    return hits / len(groups)


class _PointwiseLogistic:
    """Binary logistic loss on each row independently."""

    def __init__(self, y: np.ndarray, groups):
        self.y = y

    @staticmethod
    def base_score(y: np.ndarray) -> float:
        rate = min(max(float(np.mean(y)), _BASE_CLIP), 1.0 - _BASE_CLIP)
        return float(np.log(rate / (1.0 - rate)))

    def grads(self, raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = _stable_sigmoid(raw)
        return p - self.y, p * (1.0 - p)

    def value(self, raw: np.ndarray) -> float:
        return float(np.mean(np.logaddexp(0.0, raw) - raw * self.y))


class _LambdarankAt1:
    """Pairwise lambdas weighted by the ndcg@1 swap delta.

    With binary gains, swapping two candidates changes ndcg@1 only when one
    of them holds rank 1, so each query's lambdas involve exactly the pairs
    through its current top candidate.
    """

    def __init__(self, y: np.ndarray, groups):
        self.y = y
        self.groups = groups

    @staticmethod
    def base_score(y: np.ndarray) -> float:
        return 0.0

    def _pairs(self, raw: np.ndarray):
        """Yields (positive rows, negative rows) with ndcg@1 swap weight 1."""
        for _, rows, pids in self.groups:
            labels = self.y[rows]
            pos = rows[labels == 1]
            neg = rows[labels == 0]
            if len(pos) == 0 or len(neg) == 0:
                continue
            top = _top_row(raw, rows, pids)
            if self.y[top] == 1:
                yield np.asarray([top]), neg
            else:
                yield pos, np.asarray([top])

    def grads(self, raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g = np.zeros_like(raw)
        h = np.zeros_like(raw)
        for pos, neg in self._pairs(raw):
            sdiff = raw[pos][:, None] - raw[neg][None, :]
            rho = _stable_sigmoid(-sdiff)
            curv = rho * (1.0 - rho)
            g[pos] -= np.sum(rho, axis=1)
            g[neg] += np.sum(rho, axis=0)
            h[pos] += np.sum(curv, axis=1)
            h[neg] += np.sum(curv, axis=0)
        return g, h

    def value(self, raw: np.ndarray) -> float:
        total = 0.0
        count = 0
        for pos, neg in self._pairs(raw):
            sdiff = raw[pos][:, None] - raw[neg][None, :]
            total += float(np.sum(np.logaddexp(0.0, -sdiff)))
            count += sdiff.size
        return total / count if count else 0.0


def _constant_model(base: float, cfg: TrainConfig, schema,
                    reason: str) -> tuple[GbdtModel, TrainHistory]:
    warnings.warn(f"training degenerates to a constant model: {reason}",
                  stacklevel=3)
    model = GbdtModel(trees=(), base_score=base,
                      learning_rate=cfg.learning_rate,
                      schema_fingerprint=schema.fingerprint(),
                      best_iteration=0, objective=cfg.objective,
                      schema_names=schema.names, config_echo=cfg.as_dict())
    return model, TrainHistory(rounds=(), best_iteration=0)


def train_gbdt(train: FeatureMatrix, valid: FeatureMatrix,
               cfg: TrainConfig = TrainConfig()
               ) -> tuple[GbdtModel, TrainHistory]:
    """Boost on the training matrix, early-stopping on validation ndcg@1.

    The returned ensemble is truncated at the round with the best (earliest
    on ties) validation ndcg@1. Deterministic for a fixed config and seed.
    """
    if train.schema != valid.schema:
        raise IntegrityError("train and validation matrices have different schemas")
    if len(valid) == 0:
        raise IntegrityError("validation matrix is empty")
    if len(train) == 0:
        raise IntegrityError("training matrix is empty")
    if not train.has_labels or not valid.has_labels:
        raise IntegrityError("training requires fully labeled matrices")

    x_train, y_train = train.value_arrays()
    x_valid, y_valid = valid.value_arrays()
    groups_train = _groups(train)
    groups_valid = _groups(valid)

    if cfg.objective == "pointwise_logistic":
        objective = _PointwiseLogistic(y_train, groups_train)
        base = objective.base_score(y_train)
        if len(np.unique(y_train)) < 2:
            return _constant_model(base, cfg, train.schema,
                                   "all training labels are one class")
    else:
        objective = _LambdarankAt1(y_train, groups_train)
        base = 0.0
        has_pair = any(0 < int(np.sum(y_train[rows])) < len(rows)
                       for _, rows, _ in groups_train)
        if not has_pair:
            return _constant_model(base, cfg, train.schema,
                                   "no query has both a positive and a negative")

    raw_train = np.full(x_train.shape[0], base, dtype=np.float64)
    raw_valid = np.full(x_valid.shape[0], base, dtype=np.float64)
    trees: list[Tree] = []
    history: list[tuple[float, float]] = []
    best_ndcg = float("-inf")
    best_iter = 0
    stale = 0

    for round_no in range(1, cfg.num_rounds + 1):
        g, h = objective.grads(raw_train)
        tree, train_values = _fit_tree(x_train, g, h, cfg.max_leaves,
                                       cfg.min_samples_leaf)
        trees.append(tree)
        raw_train += cfg.learning_rate * train_values
        raw_valid += cfg.learning_rate * tree.leaf_values(x_valid)
        train_obj = objective.value(raw_train)
        ndcg = _ndcg_at_1_rows(raw_valid, groups_valid, y_valid)
        history.append((train_obj, ndcg))
        if ndcg > best_ndcg:
            best_ndcg = ndcg
            best_iter = round_no
            stale = 0
        else:
            stale += 1
            if stale >= cfg.early_stop_patience:
                break

    model = GbdtModel(trees=tuple(trees[:best_iter]), base_score=base,
                      learning_rate=cfg.learning_rate,
                      schema_fingerprint=train.schema.fingerprint(),
                      best_iteration=best_iter, objective=cfg.objective,
                      schema_names=train.schema.names,
                      config_echo=cfg.as_dict())
    return model, TrainHistory(rounds=tuple(history), best_iteration=best_iter)


def predict(model: GbdtModel, matrix: FeatureMatrix) -> RankedRun:
    """Score every row and rank per query; a pure function of its inputs."""
    if matrix.schema.fingerprint() != model.schema_fingerprint:
        raise IntegrityError(
            "feature schema fingerprint does not match the model")
    x, _ = matrix.value_arrays()
    raw = model.predict_raw(x)
    nested: dict[str, dict[str, float]] = {}
    for row, score in zip(matrix.rows, raw):
        nested.setdefault(row.query_id, {})[row.para_id] = float(score)
    return RankedRun.from_scores(nested)


def ndcg_at_1(run: RankedRun, gold: Mapping[str, frozenset[str] | set[str]]
              ) -> float:
    """Binary-gain ndcg@1: the fraction of queries whose top pick is gold."""
    if len(run) == 0:
        raise IntegrityError("cannot compute ndcg@1 of an empty run")
    hits = 0
    for qid, entries in run.queries.items():
        if qid not in gold:
            raise IntegrityError(f"query {qid!r} has no gold entry")
        top_pid = entries[0][0]
        hits += 1 if top_pid in set(gold[qid]) else 0
    return hits / len(run)


def retrain_final(train_valid: FeatureMatrix, test: FeatureMatrix,
                  cfg: TrainConfig) -> tuple[GbdtModel, RankedRun]:
    """Refit on the merged train+validation data and rank the test matrix.

    Meant to be called with a reduced early_stop_patience once test labels
    become available. With no held-out pool left, the merged set doubles as
    the early-stopping monitor, so the smaller patience is what bounds
    overfitting; patience = num_rounds reduces to plain train_gbdt.
    """
    model, _ = train_gbdt(train_valid, train_valid, cfg)
    return model, predict(model, test)
