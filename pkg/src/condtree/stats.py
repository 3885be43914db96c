"""Performance metrics, Wilcoxon signed-rank tests, and repeated k-fold CV.

The Wilcoxon implementation follows the classical treatment: zero
differences are discarded, absolute differences are ranked with mid-rank
ties, and the statistic is the positive-rank sum W+. For small effective
samples the p-value is exact over the 2^n sign-assignment distribution
(computed by convolution over doubled ranks, which are integers); larger
samples use the normal approximation with tie-corrected variance and a 0.5
continuity correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Exact enumeration bound: 2^25 assignments is still tractable, and above it
# the normal approximation error is negligible.
EXACT_LIMIT = 25

#: Significance level used by the experiment reports.
ALPHA = 0.05

_DOMAIN_FOLDS = 21


@dataclass
class PairedScores:
    """Per-fold paired performance scores (pairing by fold index)."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.a.shape != self.b.shape or self.a.ndim != 1 or self.a.size < 1:
            raise ValueError("paired scores must be equal-length vectors, length >= 1")


@dataclass
class TestResult:
    statistic: float  # signed-rank sum W+
    p_value: float
    n_effective: int  # pairs remaining after zero-difference removal
    method: str  # "exact" or "normal-approximation"


@dataclass
class FoldPlan:
    k: int
    repeats: int
    seed: int
    stratified: bool

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")


def roc_auc(scores, labels) -> float:
    """Probability that a positive outranks a negative, ties worth 0.5.

    Computed through the rank-sum identity with mid-ranks, which equals
    brute-force pair counting exactly (the ranks are dyadic rationals, so no
    rounding occurs before the final division).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc_auc requires both classes present")
    ranks = _midranks(scores)
    rank_sum = float(np.sum(ranks[pos]))
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the mean rank of their group."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        # mean of 1-based positions i+1 .. j+1; dyadic, hence exact
        ranks[order[i : j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    return ranks


def r2(predictions, targets) -> float:
    """1 - SSE/SST; requires at least two records and non-constant targets."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if targets.size < 2:
        raise ValueError("r2 requires length >= 2")
    sst = float(np.sum((targets - targets.mean()) ** 2))
    if sst == 0.0:
        raise ValueError("r2 undefined: targets have zero variance")
    sse = float(np.sum((targets - predictions) ** 2))
    return 1.0 - sse / sst


def _exact_tails(doubled_ranks: list[int], w_doubled: int) -> tuple[float, float]:
    """P(W+ >= w) and P(W+ <= w) over all sign assignments, exactly.

    Convolution over the doubled (hence integer) ranks; counts and the 2^n
    denominator are exact in float64 for n <= EXACT_LIMIT.
    """
    total = sum(doubled_ranks)
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for w in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[w:] = counts[: total + 1 - w]
        counts = counts + shifted
    denom = float(2 ** len(doubled_ranks))
    p_ge = float(np.sum(counts[w_doubled:])) / denom
    p_le = float(np.sum(counts[: w_doubled + 1])) / denom
    return p_ge, p_le


def _normal_tails(
    w: float, n: int, tie_sizes: list[int]
) -> tuple[float, float]:
    mu = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - sum(t**3 - t for t in tie_sizes) / 48.0
    sd = math.sqrt(var)
    z_ge = (w - mu - 0.5) / sd
    z_le = (w - mu + 0.5) / sd
    p_ge = 0.5 * math.erfc(z_ge / math.sqrt(2.0))
    p_le = 0.5 * math.erfc(-z_le / math.sqrt(2.0))
    return p_ge, p_le


def wilcoxon(paired: PairedScores, alternative: str = "two-sided") -> TestResult:
    """Signed-rank test of the paired differences a - b.

    alternative="two-sided" tests asymmetry about zero in either direction
    (p = 2 * min(tails), capped at 1); alternative="greater" tests a tending
    to exceed b. All differences zero yields the no-evidence result p = 1.
    """
    if alternative not in ("two-sided", "greater"):
        raise ValueError(f"unknown alternative '{alternative}'")
    d = paired.a - paired.b
    d = d[d != 0.0]
    n = int(d.size)
    if n == 0:
        return TestResult(0.0, 1.0, 0, "exact")
    ranks = _midranks(np.abs(d))
    w_plus = float(np.sum(ranks[d > 0]))
    if n <= EXACT_LIMIT:
        doubled = [int(round(2.0 * r)) for r in ranks]
        p_ge, p_le = _exact_tails(doubled, int(round(2.0 * w_plus)))
        method = "exact"
    else:
        _, tie_counts = np.unique(np.abs(d), return_counts=True)
        p_ge, p_le = _normal_tails(w_plus, n, [int(t) for t in tie_counts])
        method = "normal-approximation"
    if alternative == "greater":
        p = p_ge
    else:
        p = min(1.0, 2.0 * min(p_ge, p_le))
    return TestResult(w_plus, p, n, method)


def _repeat_rng(seed: int, repeat: int) -> np.random.Generator:
    ss = np.random.SeedSequence(
        entropy=seed & 0xFFFFFFFFFFFFFFFF, spawn_key=(_DOMAIN_FOLDS, repeat)
    )
    return np.random.Generator(np.random.PCG64(ss))


def _chunk_sizes(n: int, k: int) -> list[int]:
    big = n % k
    return [n // k + 1] * big + [n // k] * (k - big)


def _plain_folds(n: int, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    perm = rng.permutation(n)
    out = []
    start = 0
    for size in _chunk_sizes(n, k):
        out.append(np.sort(perm[start : start + size]))
        start += size
    return out


def _stratified_folds(
    labels: np.ndarray, k: int, rng: np.random.Generator
) -> list[np.ndarray]:
    folds: list[list[int]] = [[] for _ in range(k)]
    loads = np.zeros(k, dtype=np.int64)
    for cls in np.unique(labels):
        idxs = rng.permutation(np.flatnonzero(labels == cls))
        base, extra = divmod(idxs.size, k)
        # extras go to the currently least-loaded folds (ties: lowest index),
        # which keeps overall fold sizes within 1 of each other
        gets_extra = np.zeros(k, dtype=bool)
        gets_extra[np.argsort(loads, kind="stable")[:extra]] = True
        start = 0
        for fold in range(k):
            size = base + int(gets_extra[fold])
            folds[fold].extend(idxs[start : start + size].tolist())
            loads[fold] += size
            start += size
    return [np.sort(np.asarray(f, dtype=np.int64)) for f in folds]


def make_folds(n: int, labels, plan: FoldPlan) -> list[list[np.ndarray]]:
    """Per-repeat test-fold index arrays, deterministic given the plan.

    Stratified assignment preserves class proportions within one record per
    class and degrades to a plain partition for any repeat where some class
    has fewer than k members.
    """
    if n < plan.k:
        raise ValueError(f"cannot make {plan.k} folds from {n} records")
    labels = None if labels is None else np.asarray(labels)
    out = []
    for repeat in range(plan.repeats):
        rng = _repeat_rng(plan.seed, repeat)
        stratify = plan.stratified and labels is not None
        if stratify:
            _, counts = np.unique(labels, return_counts=True)
            stratify = bool(counts.min() >= plan.k)
        if stratify:
            out.append(_stratified_folds(labels, plan.k, rng))
        else:
            out.append(_plain_folds(n, plan.k, rng))
    return out
