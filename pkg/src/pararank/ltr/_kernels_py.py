"""Pure-numpy kernels for the boosted-tree trainer.

Numerically interchangeable with the compiled kernels in _kernels_cy: both
accumulate prefix sums left to right, evaluate the same gain expression per
op, and take the first position on gain ties, so models built on either
backend are bit-identical.
"""

from __future__ import annotations

import numpy as np

BACKEND = "py"

_NEG_INF = float("-inf")


def scan_split(vals: np.ndarray, grad: np.ndarray, hess: np.ndarray,
               g_total: float, h_total: float, lam: float,
               min_leaf: int) -> tuple[float, int]:
    """Best boundary in one value-sorted column.

    Position i means "x <= vals[i] goes left" (rows 0..i left, rest right).
    Valid boundaries separate distinct values and leave at least min_leaf
    rows on each side. Returns (gain, position), or (-inf, -1) if no
    boundary is valid.
    """
    n = vals.shape[0]
    if n < 2 * min_leaf:
        return (_NEG_INF, -1)
    gl = np.cumsum(grad)[:-1]
    hl = np.cumsum(hess)[:-1]
    gr = g_total - gl
    hr = h_total - hl
    parent = g_total * g_total / (h_total + lam)
    gain = gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent
    left_count = np.arange(1, n)
    valid = (vals[:-1] < vals[1:]) \
        & (left_count >= min_leaf) & (n - left_count >= min_leaf)
    if not valid.any():
        return (_NEG_INF, -1)
    gain = np.where(valid, gain, _NEG_INF)
    best = int(np.argmax(gain))
    return (float(gain[best]), best)


def route_rows(x: np.ndarray, feature: np.ndarray, threshold: np.ndarray,
               left: np.ndarray, right: np.ndarray,
               default_left: np.ndarray) -> np.ndarray:
    """Leaf node index for every row of x (comparison-only, no arithmetic)."""
    n = x.shape[0]
    node = np.zeros(n, dtype=np.int32)
    while True:
        feat = feature[node]
        active = feat >= 0
        if not active.any():
            return node
        rows = np.nonzero(active)[0]
        nids = node[rows]
        xv = x[rows, feat[rows]]
        goleft = np.where(np.isnan(xv), default_left[nids] != 0,
                          xv <= threshold[nids])
        node[rows] = np.where(goleft, left[nids], right[nids])
