# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the O(n^2) stages.

Both kernels mirror the numpy versions in ``_pure.py`` exactly in
semantics; ``confclust.kernels`` picks whichever is importable.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY
from libcpp.vector cimport vector
from libcpp.pair cimport pair
from libcpp.algorithm cimport partial_sort

cnp.import_array()


def pair_scores(const double[:, ::1] x, const double[:, ::1] p):
    """Condensed compression ratios for points stored as rows of ``x`` and ``p``."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t k = p.shape[1]
    cdef Py_ssize_t i, j, f, pos = 0
    cdef double acc_x, acc_p, diff
    out_arr = np.empty(n * (n - 1) // 2, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                acc_x = 0.0
                for f in range(d):
                    diff = x[i, f] - x[j, f]
                    acc_x = acc_x + diff * diff
                acc_p = 0.0
                for f in range(k):
                    diff = p[i, f] - p[j, f]
                    acc_p = acc_p + diff * diff
                if acc_p == 0.0:
                    out[pos] = INFINITY
                else:
                    out[pos] = sqrt(acc_x / acc_p)
                pos += 1
    return out_arr


def rank_neighbors(const double[::1] scores, Py_ssize_t n, Py_ssize_t depth):
    """Per-vertex top-``depth`` partners by score, descending, ties by index."""
    cdef Py_ssize_t u, v, idx, m = n - 1
    cdef vector[pair[double, Py_ssize_t]] row
    out_arr = np.empty((n, depth), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    if depth == 0:
        return out_arr
    row.resize(m)
    with nogil:
        for u in range(n):
            idx = 0
            for v in range(n):
                if v == u:
                    continue
                if v < u:
                    row[idx].first = -scores[v * n - v * (v + 1) // 2 + u - v - 1]
                else:
                    row[idx].first = -scores[u * n - u * (u + 1) // 2 + v - u - 1]
                row[idx].second = v
                idx += 1
            partial_sort(row.begin(), row.begin() + depth, row.end())
            for v in range(depth):
                out[u, v] = row[v].second
    return out_arr
