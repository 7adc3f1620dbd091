"""NumPy implementations of the hot kernels.

Every function here has a compiled twin in ``_kernels.pyx`` and the two must agree
bit-for-bit: floating-point terms are accumulated in the same order (column by column),
so vectorising over rows never changes a rounding.
"""

from __future__ import annotations

import numpy as np

# Upper bound on the (queries x references) block materialised at once.
_BLOCK_CELLS = 1 << 22


def nearest_l1(q_num, q_cat, r_num, r_cat):
    """Minimum mixed L1 distance from every query row to any reference row.

    Numeric parts are summed as ``|a - b|`` column by column, then every categorical
    mismatch adds 1.0.
    """
    q_num = np.ascontiguousarray(q_num, dtype=np.float64)
    r_num = np.ascontiguousarray(r_num, dtype=np.float64)
    q_cat = np.ascontiguousarray(q_cat, dtype=np.int64)
    r_cat = np.ascontiguousarray(r_cat, dtype=np.int64)
    n, m = q_num.shape[0], r_num.shape[0]
    out = np.empty(n, dtype=np.float64)
    if m == 0:
        out.fill(np.inf)
        return out
    step = max(1, _BLOCK_CELLS // m)
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        acc = np.zeros((hi - lo, m), dtype=np.float64)
        for j in range(q_num.shape[1]):
            acc += np.abs(q_num[lo:hi, j, None] - r_num[None, :, j])
        for j in range(q_cat.shape[1]):
            acc += q_cat[lo:hi, j, None] != r_cat[None, :, j]
        out[lo:hi] = acc.min(axis=1)
    return out


def _split_threshold(lo: float, hi: float) -> float:
    mid = (lo + hi) / 2.0
    # adjacent floats: the midpoint can round up onto ``hi``, which would then go left
    return lo if mid >= hi else mid


def best_split(X, y, min_leaf):
    """Best binary Gini split over all columns of ``X`` for 0/1 labels ``y``.

    The criterion maximised is ``(l0^2 + l1^2)/n_l + (r0^2 + r1^2)/n_r``, which is
    equivalent to minimising the size-weighted child Gini impurity. Only splits that
    strictly beat the parent, leave ``min_leaf`` rows on each side and separate distinct
    values are eligible. Ties go to the lowest feature index, then the lowest threshold.

    Returns:
        ``(feature, threshold, score)``; ``feature == -1`` when no split qualifies.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    n, n_features = X.shape
    min_leaf = max(1, int(min_leaf))
    best_feature, best_threshold = -1, 0.0
    if n < 2 * min_leaf:
        return best_feature, best_threshold, 0.0
    n1 = float(y.sum())
    n0 = float(n) - n1
    best_score = (n0 * n0 + n1 * n1) / float(n)

    n_left = np.arange(1, n, dtype=np.float64)
    n_right = float(n) - n_left
    size_ok = (n_left >= min_leaf) & (n_right >= min_leaf)
    for f in range(n_features):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        l1 = np.cumsum(y[order])[:-1].astype(np.float64)
        l0 = n_left - l1
        r1 = n1 - l1
        r0 = n_right - r1
        score = (l0 * l0 + l1 * l1) / n_left + (r0 * r0 + r1 * r1) / n_right
        valid = size_ok & (xs[:-1] < xs[1:])
        if not valid.any():
            continue
        score = np.where(valid, score, -np.inf)
        i = int(np.argmax(score))
        if score[i] > best_score:
            best_score = float(score[i])
            best_feature = f
            best_threshold = _split_threshold(float(xs[i]), float(xs[i + 1]))
    return best_feature, best_threshold, best_score


def fnv1a_64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h
