"""Numba split-scan kernels.

Each kernel receives one candidate feature's values sorted ascending with the
targets aligned, and returns the best admissible boundary as
(score, n_left, threshold), or (inf, -1, nan) when no boundary is admissible.
Boundaries are inadmissible when the neighbouring values are equal, when a
child would fall below ``min_leaf``, or when the mid-point rounds onto an
endpoint (adjacent floats).

The arithmetic is written so the pure-numpy fallback can reproduce it bitwise:
class statistics are exact integer counts, per-class terms accumulate in
ascending class order, and entropy reads log2 values from a shared
precomputed table instead of calling a transcendental inside the kernel.
"""

import numpy as np
from numba import njit

BACKEND_NAME = "numba"


@njit(cache=True, nogil=True)
def scan_gini(xs, ys, n_classes, min_leaf, weighted):
    n = xs.shape[0]
    total = np.zeros(n_classes, dtype=np.int64)
    for i in range(n):
        total[ys[i]] += 1
    left = np.zeros(n_classes, dtype=np.int64)
    fn = float(n)
    best_score = np.inf
    best_nl = -1
    best_t = np.nan
    for i in range(n - 1):
        left[ys[i]] += 1
        if xs[i] == xs[i + 1]:
            continue
        nl = i + 1
        nr = n - nl
        if nl < min_leaf or nr < min_leaf:
            continue
        t = (xs[i] + xs[i + 1]) / 2.0
        if not (xs[i] < t and t < xs[i + 1]):
            continue
        fl = float(nl)
        fr = float(nr)
        accl = 0.0
        accr = 0.0
        for c in range(n_classes):
            pl = left[c] / fl
            accl += pl * pl
            pr = (total[c] - left[c]) / fr
            accr += pr * pr
        il = 1.0 - accl
        ir = 1.0 - accr
        if weighted:
            score = (fl * il + fr * ir) / fn
        else:
            score = il + ir
        if score < best_score:
            best_score = score
            best_nl = nl
            best_t = t
    return best_score, best_nl, best_t


@njit(cache=True, nogil=True)
def scan_entropy(xs, ys, n_classes, min_leaf, weighted, log2_table):
    n = xs.shape[0]
    total = np.zeros(n_classes, dtype=np.int64)
    for i in range(n):
        total[ys[i]] += 1
    left = np.zeros(n_classes, dtype=np.int64)
    fn = float(n)
    best_score = np.inf
    best_nl = -1
    best_t = np.nan
    for i in range(n - 1):
        left[ys[i]] += 1
        if xs[i] == xs[i + 1]:
            continue
        nl = i + 1
        nr = n - nl
        if nl < min_leaf or nr < min_leaf:
            continue
        t = (xs[i] + xs[i + 1]) / 2.0
        if not (xs[i] < t and t < xs[i + 1]):
            continue
        fl = float(nl)
        fr = float(nr)
        accl = 0.0
        accr = 0.0
        for c in range(n_classes):
            lc = left[c]
            rc = total[c] - lc
            accl += lc * log2_table[lc]
            accr += rc * log2_table[rc]
        il = log2_table[nl] - accl / fl
        ir = log2_table[nr] - accr / fr
        if weighted:
            score = (fl * il + fr * ir) / fn
        else:
            score = il + ir
        if score < best_score:
            best_score = score
            best_nl = nl
            best_t = t
    return best_score, best_nl, best_t


@njit(cache=True, nogil=True)
def scan_variance(xs, ts, min_leaf, weighted):
    n = xs.shape[0]
    total1 = 0.0
    total2 = 0.0
    for i in range(n):
        total1 += ts[i]
        total2 += ts[i] * ts[i]
    s1 = 0.0
    s2 = 0.0
    fn = float(n)
    best_score = np.inf
    best_nl = -1
    best_t = np.nan
    for i in range(n - 1):
        s1 += ts[i]
        s2 += ts[i] * ts[i]
        if xs[i] == xs[i + 1]:
            continue
        nl = i + 1
        nr = n - nl
        if nl < min_leaf or nr < min_leaf:
            continue
        t = (xs[i] + xs[i + 1]) / 2.0
        if not (xs[i] < t and t < xs[i + 1]):
            continue
        fl = float(nl)
        fr = float(nr)
        ml = s1 / fl
        il = s2 / fl - ml * ml
        if il < 0.0:
            il = 0.0
        mr = (total1 - s1) / fr
        ir = (total2 - s2) / fr - mr * mr
        if ir < 0.0:
            ir = 0.0
        if weighted:
            score = (fl * il + fr * ir) / fn
        else:
            score = il + ir
        if score < best_score:
            best_score = score
            best_nl = nl
            best_t = t
    return best_score, best_nl, best_t
