"""Unit checks for the split/route kernels plus py/cy backend parity.

The two backends must agree bit for bit: they are selected at import time
and the trainer's determinism contract spans both.
"""

import os
import subprocess
import sys

import numpy as np
import pytest

from pararank.ltr import _kernels_py
from pararank.ltr.kernels import available_backends

BACKENDS = available_backends()

needs_compiled = pytest.mark.skipif(
    "cy" not in BACKENDS, reason="compiled kernels not built")


def random_sorted_column(rng, n):
    vals = np.sort(rng.choice(np.linspace(-2, 2, max(2, n // 2)), size=n))
    grad = rng.normal(size=n)
    hess = rng.uniform(0.01, 1.0, size=n)
    return (np.ascontiguousarray(vals), np.ascontiguousarray(grad),
            np.ascontiguousarray(hess))


class TestScanSplit:
    def test_no_split_when_all_values_equal(self):
        vals = np.full(10, 3.0)
        grad = np.linspace(-1, 1, 10)
        hess = np.ones(10)
        gain, pos = _kernels_py.scan_split(vals, grad, hess,
                                           float(grad.sum()), 10.0, 1.0, 1)
        assert pos == -1

    def test_min_leaf_respected(self):
        vals = np.array([0.0, 1.0, 2.0, 3.0])
        grad = np.array([-5.0, 1.0, 1.0, 3.0])
        hess = np.ones(4)
        _, pos = _kernels_py.scan_split(vals, grad, hess, 0.0, 4.0, 1.0, 2)
        assert pos == 1  # only the middle boundary leaves 2 rows per side

    def test_too_few_rows(self):
        vals = np.array([0.0, 1.0])
        gain, pos = _kernels_py.scan_split(vals, vals, vals, 1.0, 1.0, 1.0, 2)
        assert pos == -1

    def test_picks_separating_boundary(self):
        # gradients all negative on the left, positive on the right
        vals = np.array([0.0, 0.0, 1.0, 1.0, 2.0, 2.0])
        grad = np.array([-2.0, -2.0, -2.0, -2.0, 4.0, 4.0])
        hess = np.ones(6)
        gain, pos = _kernels_py.scan_split(vals, grad, hess,
                                           float(grad.sum()), 6.0, 1.0, 1)
        assert pos == 3
        assert gain > 0


class TestRouteRows:
    def tree_arrays(self):
        # root splits feature 0 at 0.5; left child splits feature 1 at 0.0
        feature = np.array([0, 1, -1, -1, -1], dtype=np.int32)
        threshold = np.array([0.5, 0.0, 0.0, 0.0, 0.0])
        left = np.array([1, 3, -1, -1, -1], dtype=np.int32)
        right = np.array([2, 4, -1, -1, -1], dtype=np.int32)
        default_left = np.array([1, 0, 0, 0, 0], dtype=np.uint8)
        return feature, threshold, left, right, default_left

    def test_routing(self):
        x = np.array([[0.4, -1.0], [0.4, 1.0], [0.6, 0.0]])
        leaves = _kernels_py.route_rows(np.ascontiguousarray(x),
                                        *self.tree_arrays())
        assert leaves.tolist() == [3, 4, 2]

    def test_nan_follows_default_direction(self):
        x = np.array([[np.nan, -1.0]])
        leaves = _kernels_py.route_rows(np.ascontiguousarray(x),
                                        *self.tree_arrays())
        assert leaves.tolist() == [3]  # default left at root, then x1 <= 0


@needs_compiled
class TestBackendParity:
    def test_scan_split_bitwise_identical(self):
        rng = np.random.default_rng(5)
        cy = BACKENDS["cy"]
        for _ in range(300):
            n = int(rng.integers(2, 60))
            vals, grad, hess = random_sorted_column(rng, n)
            g_total = float(np.sum(grad))
            h_total = float(np.sum(hess))
            min_leaf = int(rng.integers(1, 4))
            a = _kernels_py.scan_split(vals, grad, hess, g_total, h_total,
                                       1.0, min_leaf)
            b = cy.scan_split(vals, grad, hess, g_total, h_total,
                              1.0, min_leaf)
            assert a[1] == b[1]
            assert a[0] == b[0] or (np.isinf(a[0]) and np.isinf(b[0]))

    def test_route_rows_identical(self):
        rng = np.random.default_rng(6)
        cy = BACKENDS["cy"]
        feature = np.array([0, 1, -1, -1, -1], dtype=np.int32)
        threshold = np.array([0.5, 0.0, 0.0, 0.0, 0.0])
        left = np.array([1, 3, -1, -1, -1], dtype=np.int32)
        right = np.array([2, 4, -1, -1, -1], dtype=np.int32)
        default_left = np.array([1, 0, 0, 0, 0], dtype=np.uint8)
        x = np.ascontiguousarray(rng.normal(size=(500, 2)))
        a = _kernels_py.route_rows(x, feature, threshold, left, right,
                                   default_left)
        b = cy.route_rows(x, feature, threshold, left, right, default_left)
        assert np.array_equal(a, b)

    def test_trained_models_identical_across_backends(self, tmp_path):
        script = r"""
import hashlib
import numpy as np
from pararank.features import FeatureMatrix, FeatureSchema, Row
from pararank.ltr import TrainConfig, train_gbdt, model_to_json
rng = np.random.default_rng(99)
rows = []
for q in range(25):
    n = int(rng.integers(4, 12))
    feats = rng.normal(size=(n, 9))
    gold = int(rng.integers(0, n))
    for c in range(n):
        rows.append(Row(f"q{q:02d}", f"p{c:02d}", 1 if c == gold else 0,
                        tuple(feats[c])))
m = FeatureMatrix(FeatureSchema(tuple(f"f{i}" for i in range(9))), tuple(rows))
cfg = TrainConfig(num_rounds=12, early_stop_patience=12, min_samples_leaf=1,
                  seed=4)
model, _ = train_gbdt(m, m, cfg)
print(hashlib.sha256(model_to_json(model).encode()).hexdigest())
"""
        digests = {}
        for backend in ("py", "cy"):
            env = dict(os.environ, PARARANK_KERNELS=backend)
            proc = subprocess.run([sys.executable, "-c", script],
                                  capture_output=True, text=True, env=env)
            assert proc.returncode == 0, proc.stderr
            digests[backend] = proc.stdout.strip()
        assert digests["py"] == digests["cy"]
