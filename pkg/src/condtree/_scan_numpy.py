"""Pure-numpy split-scan fallbacks.

Vectorized over boundaries, but arithmetically identical to the numba
kernels: integer counts come from sequential cumulative sums, per-class terms
accumulate in ascending class order with elementwise ufuncs (never a pairwise
reduction across classes), and entropy reads the same precomputed log2 table.
The result is bitwise equal to the numba backend, which the test suite
asserts.
"""

import numpy as np

BACKEND_NAME = "numpy"

_NO_SPLIT = (np.inf, -1, np.nan)


def _boundary_frame(xs, min_leaf):
    """Shared boundary bookkeeping: sizes, mid-points, admissibility mask."""
    n = xs.shape[0]
    a = xs[:-1]
    b = xs[1:]
    nl = np.arange(1, n, dtype=np.int64)
    nr = n - nl
    t = (a + b) / 2.0
    valid = (a != b) & (nl >= min_leaf) & (nr >= min_leaf) & (a < t) & (t < b)
    return nl, nr, t, valid


def _pick(score, t, valid):
    score = np.where(valid, score, np.inf)
    idx = int(np.argmin(score))
    if not valid[idx]:
        return _NO_SPLIT
    return float(score[idx]), idx + 1, float(t[idx])


def _left_counts(ys, n_classes):
    n = ys.shape[0]
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), ys] = 1
    cum = np.cumsum(onehot, axis=0)
    return cum[:-1], cum[-1]


def scan_gini(xs, ys, n_classes, min_leaf, weighted):
    n = xs.shape[0]
    if n < 2:
        return _NO_SPLIT
    nl, nr, t, valid = _boundary_frame(xs, min_leaf)
    if not valid.any():
        return _NO_SPLIT
    left, total = _left_counts(ys, n_classes)
    fl = nl.astype(np.float64)
    fr = nr.astype(np.float64)
    accl = np.zeros(n - 1, dtype=np.float64)
    accr = np.zeros(n - 1, dtype=np.float64)
    for c in range(n_classes):
        pl = left[:, c] / fl
        accl += pl * pl
        pr = (total[c] - left[:, c]) / fr
        accr += pr * pr
    il = 1.0 - accl
    ir = 1.0 - accr
    if weighted:
        score = (fl * il + fr * ir) / float(n)
    else:
        score = il + ir
    return _pick(score, t, valid)


def scan_entropy(xs, ys, n_classes, min_leaf, weighted, log2_table):
    n = xs.shape[0]
    if n < 2:
        return _NO_SPLIT
    nl, nr, t, valid = _boundary_frame(xs, min_leaf)
    if not valid.any():
        return _NO_SPLIT
    left, total = _left_counts(ys, n_classes)
    fl = nl.astype(np.float64)
    fr = nr.astype(np.float64)
    accl = np.zeros(n - 1, dtype=np.float64)
    accr = np.zeros(n - 1, dtype=np.float64)
    for c in range(n_classes):
        lc = left[:, c]
        rc = total[c] - lc
        accl += lc * log2_table[lc]
        accr += rc * log2_table[rc]
    il = log2_table[nl] - accl / fl
    ir = log2_table[nr] - accr / fr
    if weighted:
        score = (fl * il + fr * ir) / float(n)
    else:
        score = il + ir
    return _pick(score, t, valid)


def scan_variance(xs, ts, min_leaf, weighted):
    n = xs.shape[0]
    if n < 2:
        return _NO_SPLIT
    nl, nr, t, valid = _boundary_frame(xs, min_leaf)
    if not valid.any():
        return _NO_SPLIT
    cs1 = np.cumsum(ts)
    cs2 = np.cumsum(ts * ts)
    s1 = cs1[:-1]
    s2 = cs2[:-1]
    total1 = cs1[-1]
    total2 = cs2[-1]
    fl = nl.astype(np.float64)
    fr = nr.astype(np.float64)
    ml = s1 / fl
    il = s2 / fl - ml * ml
    il = np.where(il < 0.0, 0.0, il)
    mr = (total1 - s1) / fr
    ir = (total2 - s2) / fr - mr * mr
    ir = np.where(ir < 0.0, 0.0, ir)
    if weighted:
        score = (fl * il + fr * ir) / float(n)
    else:
        score = il + ir
    return _pick(score, t, valid)
