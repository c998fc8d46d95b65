# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the boosted-tree trainer.

Mirrors _kernels_py operation by operation: sequential prefix sums, the
same gain expression, first position wins gain ties. Either backend must
produce bit-identical models.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, isnan

BACKEND = "cy"


def scan_split(double[::1] vals, double[::1] grad, double[::1] hess,
               double g_total, double h_total, double lam, Py_ssize_t min_leaf):
    """Best boundary in one value-sorted column; see _kernels_py.scan_split."""
    cdef Py_ssize_t n = vals.shape[0]
    cdef Py_ssize_t i, left_count, best_pos = -1
    cdef double gl = 0.0, hl = 0.0
    cdef double gr, hr, gain, parent
    cdef double best_gain = -INFINITY
    if n < 2 * min_leaf:
        return (-INFINITY, -1)
    parent = g_total * g_total / (h_total + lam)
    for i in range(n - 1):
        gl = gl + grad[i]
        hl = hl + hess[i]
        left_count = i + 1
        if n - left_count < min_leaf:
            break
        if left_count < min_leaf:
            continue
        if not (vals[i] < vals[i + 1]):
            continue
        gr = g_total - gl
        hr = h_total - hl
        gain = gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent
        if gain > best_gain:
            best_gain = gain
            best_pos = i
    if best_pos < 0:
        return (-INFINITY, -1)
    return (best_gain, best_pos)


def route_rows(double[:, ::1] x, int[::1] feature, double[::1] threshold,
               int[::1] left, int[::1] right, unsigned char[::1] default_left):
    """Leaf node index for every row of x; see _kernels_py.route_rows."""
    cdef Py_ssize_t n = x.shape[0]
    out = np.zeros(n, dtype=np.int32)
    cdef int[::1] node = out
    cdef Py_ssize_t row
    cdef int nid
    cdef double xv
    for row in range(n):
        nid = 0
        while feature[nid] >= 0:
            xv = x[row, feature[nid]]
            if isnan(xv):
                nid = left[nid] if default_left[nid] else right[nid]
            elif xv <= threshold[nid]:
                nid = left[nid]
            else:
                nid = right[nid]
        node[row] = nid
    return out
