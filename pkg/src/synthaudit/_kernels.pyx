# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Must stay bit-identical to ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()


def nearest_l1(q_num, q_cat, r_num, r_cat):
    cdef const double[:, ::1] qn = np.ascontiguousarray(q_num, dtype=np.float64)
    cdef const double[:, ::1] rn = np.ascontiguousarray(r_num, dtype=np.float64)
    cdef const int64_t[:, ::1] qc = np.ascontiguousarray(q_cat, dtype=np.int64)
    cdef const int64_t[:, ::1] rc = np.ascontiguousarray(r_cat, dtype=np.int64)
    cdef Py_ssize_t n = qn.shape[0], m = rn.shape[0]
    cdef Py_ssize_t p = qn.shape[1], k = qc.shape[1]
    cdef Py_ssize_t i, r, j
    cdef double acc, best
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            best = INFINITY
            for r in range(m):
                acc = 0.0
                for j in range(p):
                    acc = acc + fabs(qn[i, j] - rn[r, j])
                    # partial sums only grow, so pruning is exact
                    if acc >= best:
                        break
                if acc >= best:
                    continue
                for j in range(k):
                    if qc[i, j] != rc[r, j]:
                        acc = acc + 1.0
                        if acc >= best:
                            break
                if acc < best:
                    best = acc
                    if best == 0.0:
                        break
            out[i] = best
    return out_arr


cdef inline double _split_threshold(double lo, double hi) nogil:
    cdef double mid = (lo + hi) / 2.0
    if mid >= hi:
        return lo
    return mid


def best_split(X, y, min_leaf):
    cdef const double[:, ::1] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const int64_t[::1] yv = np.ascontiguousarray(y, dtype=np.int64)
    cdef Py_ssize_t n = xv.shape[0], n_features = xv.shape[1]
    cdef Py_ssize_t leaf = max(1, int(min_leaf))
    cdef Py_ssize_t f, i, best_feature = -1
    cdef double best_threshold = 0.0
    if n < 2 * leaf:
        return best_feature, best_threshold, 0.0
    cdef double n1 = 0.0, n0, best_score
    for i in range(n):
        n1 += yv[i]
    n0 = <double>n - n1
    best_score = (n0 * n0 + n1 * n1) / <double>n

    cdef const cnp.intp_t[::1] order
    cdef double l1, l0, r1, r0, nl, nr, score, feat_best, xa, xb
    cdef Py_ssize_t feat_i
    for f in range(n_features):
        order = np.argsort(np.asarray(xv[:, f]), kind="stable")
        l1 = 0.0
        feat_best = -INFINITY
        feat_i = -1
        with nogil:
            for i in range(n - 1):
                l1 = l1 + yv[order[i]]
                nl = <double>(i + 1)
                nr = <double>n - nl
                if nl < leaf or nr < leaf:
                    continue
                xa = xv[order[i], f]
                xb = xv[order[i + 1], f]
                if not (xa < xb):
                    continue
                l0 = nl - l1
                r1 = n1 - l1
                r0 = nr - r1
                score = (l0 * l0 + l1 * l1) / nl + (r0 * r0 + r1 * r1) / nr
                if score > feat_best:
                    feat_best = score
                    feat_i = i
        if feat_i >= 0 and feat_best > best_score:
            best_score = feat_best
            best_feature = f
            best_threshold = _split_threshold(xv[order[feat_i], f], xv[order[feat_i + 1], f])
    return best_feature, best_threshold, best_score


def fnv1a_64(const unsigned char[::1] data):
    cdef uint64_t h = 0xCBF29CE484222325ULL
    cdef Py_ssize_t i
    with nogil:
        for i in range(data.shape[0]):
            h ^= data[i]
            h *= 0x100000001B3ULL
    return int(h)
