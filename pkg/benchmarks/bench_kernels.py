"""Benchmarks the compiled kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--rounds 30]

Covers the two hot paths (split scanning, tree routing) in isolation and a
full training run. Both backends produce bit-identical models; the point
of the extension is speed only.
"""

from __future__ import annotations

import argparse
import subprocess
import sys
import time

import numpy as np

from pararank.ltr.kernels import available_backends


def bench_scan_split(impl, n_rows: int = 4000, repeats: int = 200) -> float:
    rng = np.random.default_rng(0)
    vals = np.sort(rng.choice(np.linspace(0, 1, n_rows // 4), size=n_rows))
    grad = np.ascontiguousarray(rng.normal(size=n_rows))
    hess = np.ascontiguousarray(rng.uniform(0.01, 0.25, size=n_rows))
    g_total = float(np.sum(grad))
    h_total = float(np.sum(hess))
    start = time.perf_counter()
    for _ in range(repeats):
        impl.scan_split(vals, grad, hess, g_total, h_total, 1.0, 5)
    return (time.perf_counter() - start) / repeats


def bench_route_rows(impl, n_rows: int = 20000, n_nodes: int = 63,
                     repeats: int = 50) -> float:
    rng = np.random.default_rng(1)
    # random full binary tree over 9 features
    n_internal = n_nodes // 2
    feature = np.full(n_nodes, -1, dtype=np.int32)
    threshold = np.zeros(n_nodes)
    left = np.full(n_nodes, -1, dtype=np.int32)
    right = np.full(n_nodes, -1, dtype=np.int32)
    for i in range(n_internal):
        feature[i] = int(rng.integers(0, 9))
        threshold[i] = float(rng.uniform(0.2, 0.8))
        left[i] = 2 * i + 1
        right[i] = 2 * i + 2
    default_left = np.ones(n_nodes, dtype=np.uint8)
    x = np.ascontiguousarray(rng.uniform(size=(n_rows, 9)))
    start = time.perf_counter()
    for _ in range(repeats):
        impl.route_rows(x, feature, threshold, left, right, default_left)
    return (time.perf_counter() - start) / repeats


TRAIN_SCRIPT = r"""
import time
import numpy as np
from pararank.features import FeatureMatrix, FeatureSchema, Row
from pararank.ltr import TrainConfig, train_gbdt
rng = np.random.default_rng(3)
rows = []
for q in range({n_queries}):
    n = int(rng.integers(10, 40))
    feats = rng.uniform(0, 1, size=(n, 9))
    gold = int(rng.integers(0, n))
    feats[gold, 3] += 0.4
    for c in range(n):
        rows.append(Row(f"q{{q:04d}}", f"p{{c:03d}}", 1 if c == gold else 0,
                        tuple(feats[c])))
m = FeatureMatrix(FeatureSchema(tuple(f"f{{i}}" for i in range(9))), tuple(rows))
valid = FeatureMatrix(m.schema, m.rows[:1500])
cfg = TrainConfig(num_rounds={rounds}, early_stop_patience={rounds},
                  min_samples_leaf=5, seed=0)
start = time.perf_counter()
train_gbdt(m, valid, cfg)
print(time.perf_counter() - start)
"""


def bench_training(backend: str, n_queries: int, rounds: int) -> float:
    import os
    env = dict(os.environ, PARARANK_KERNELS=backend)
    script = TRAIN_SCRIPT.format(n_queries=n_queries, rounds=rounds)
    proc = subprocess.run([sys.executable, "-c", script],
                          capture_output=True, text=True, env=env, check=True)
    return float(proc.stdout.strip())


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--rounds", type=int, default=30,
                        help="boosting rounds for the end-to-end benchmark")
    parser.add_argument("--queries", type=int, default=300)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    results: dict[str, dict[str, float]] = {}
    for name, impl in backends.items():
        results[name] = {
            "scan_split (4k rows)": bench_scan_split(impl),
            "route_rows (20k rows)": bench_route_rows(impl),
        }
    for name in backends:
        results[name][f"train ({args.queries}q x {args.rounds} rounds)"] = \
            bench_training(name, args.queries, args.rounds)

    ops = list(next(iter(results.values())))
    width = max(len(op) for op in ops) + 2
    header = f"{'operation':<{width}}" + "".join(f"{b:>12}" for b in results)
    if len(results) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for op in ops:
        row = f"{op:<{width}}"
        times = [results[b][op] for b in results]
        for t in times:
            row += f"{t * 1e3:>10.3f}ms"
        if len(times) == 2 and times[1] > 0:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    sys.exit(main())
