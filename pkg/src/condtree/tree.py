"""CART-style binary trees with the conditioning operator as an inference
parameter.

Training never consults the operator: thresholds are mid-points between
consecutive distinct sorted values and the left partition is always
``x <= t``. Whether inference routes threshold-equal values left (``<=``) or
right (``<``) is decided per prediction call, so one fitted tree serves both
conditionings.
"""

from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from . import backend
from .data import CLASSIFICATION, REGRESSION, Dataset

#: Returned by best_split when no admissible boundary exists.
NO_SPLIT = None


class Operator(enum.Enum):
    """Inference-time conditioning: route left iff x <= t (LE) or x < t (LT)."""

    LE = "le"
    LT = "lt"


_CLS_IMPURITIES = ("gini", "entropy")
_REG_IMPURITIES = ("variance",)


@dataclass(frozen=True)
class Hyperparams:
    """Tree induction settings.

    min_samples_leaf is enforced as an admissibility filter on split
    boundaries; max_depth=None means unbounded (root at depth 0);
    n_random_features="all" disables per-node feature subsampling;
    weighted_impurity selects the size-weighted split objective
    (|L|I(L)+|R|I(R))/N rather than the unweighted sum I(L)+I(R).
    """

    min_samples_leaf: int = 1
    max_depth: int | None = None
    impurity: str = "gini"
    n_random_features: int | str = "all"
    seed: int = 0
    weighted_impurity: bool = True

    def __post_init__(self):
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 when bounded")
        if self.impurity not in _CLS_IMPURITIES + _REG_IMPURITIES:
            raise ValueError(f"unknown impurity '{self.impurity}'")
        if self.n_random_features != "all" and (
            not isinstance(self.n_random_features, int) or self.n_random_features < 1
        ):
            raise ValueError("n_random_features must be 'all' or a positive integer")


@dataclass
class Leaf:
    """stats: class-probability vector (classification) or mean target."""

    stats: object
    n_samples: int


@dataclass
class Internal:
    feature: int
    threshold: float
    left: object
    right: object


@dataclass
class Tree:
    root: object
    task: str
    n_features: int
    hyperparams: Hyperparams
    n_classes: int | None = None
    trained_on_negated: bool = False


@dataclass(frozen=True)
class SplitResult:
    feature: int
    threshold: float
    k_star: int  # 1-based boundary rank = number of rows in the left partition
    score: float


def _log2_table(n: int) -> np.ndarray:
    """log2 of 0..n with the 0 entry forced to 0.0 (0*log2(0) := 0).

    Both scan backends and the public entropy function read transcendental
    values from tables built exactly this way, so their scores agree bitwise.
    """
    vals = np.arange(n + 1, dtype=np.float64)
    vals[0] = 1.0
    return np.log2(vals)


def gini(labels) -> float:
    """1 - sum_c p_c^2 over the class proportions of a non-empty multiset."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("gini of an empty multiset")
    _, counts = np.unique(labels, return_counts=True)
    n = float(labels.size)
    acc = 0.0
    for c in counts:
        p = c / n
        acc += p * p
    return 1.0 - acc


def entropy(labels) -> float:
    """-sum_c p_c log2 p_c, computed as log2(n) - sum_c c*log2(c) / n."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("entropy of an empty multiset")
    _, counts = np.unique(labels, return_counts=True)
    n = labels.size
    table = _log2_table(n)
    acc = 0.0
    for c in counts:
        acc += c * table[c]
    return float(table[n] - acc / n)


def variance(targets) -> float:
    """Population variance via running sums, matching the scan kernels."""
    ts = np.asarray(targets, dtype=np.float64)
    if ts.size == 0:
        raise ValueError("variance of an empty multiset")
    s1 = 0.0
    s2 = 0.0
    for v in ts:
        s1 += v
        s2 += v * v
    n = float(ts.size)
    m = s1 / n
    var = s2 / n - m * m
    if var < 0.0:
        var = 0.0
    return var


def _scan_feature(xs_sorted, targets_sorted, data, hp, log2_table):
    k = backend.kernels()
    msl = hp.min_samples_leaf
    weighted = hp.weighted_impurity
    if hp.impurity == "gini":
        return k.scan_gini(xs_sorted, targets_sorted, data.n_classes, msl, weighted)
    if hp.impurity == "entropy":
        return k.scan_entropy(
            xs_sorted, targets_sorted, data.n_classes, msl, weighted, log2_table
        )
    return k.scan_variance(xs_sorted, targets_sorted, msl, weighted)


def best_split(data, subset, candidate_features, hp, log2_table=None):
    """Best admissible (feature, mid-point) split of the subset, or NO_SPLIT.

    Candidate features are scanned in ascending index order and boundaries in
    ascending rank; ties keep the first strictly better score, which realizes
    the documented tie-break (lowest feature index, then lowest boundary
    rank).
    """
    subset = np.asarray(subset, dtype=np.int64)
    targets = data.targets[subset]
    if hp.impurity == "entropy" and log2_table is None:
        log2_table = _log2_table(subset.size)
    best = NO_SPLIT
    for f in sorted(int(f) for f in candidate_features):
        xs = data.features[subset, f]
        order = np.argsort(xs, kind="stable")
        score, nl, thr = _scan_feature(xs[order], targets[order], data, hp, log2_table)
        if nl < 0:
            continue
        if best is NO_SPLIT or score < best.score:
            best = SplitResult(f, float(thr), int(nl), float(score))
    return best


def _validate_task(data: Dataset, hp: Hyperparams) -> None:
    ok = _CLS_IMPURITIES if data.task == CLASSIFICATION else _REG_IMPURITIES
    if hp.impurity not in ok:
        raise ValueError(f"impurity '{hp.impurity}' is invalid for {data.task}")


def _default_rng_key(seed: int) -> bytes:
    return struct.pack("<q", seed)


def _sample_features(rng_key: bytes, subset: np.ndarray, d: int, m: int) -> np.ndarray:
    """Feature sample for one node, derived from (tree key, subset rows).

    Keying the draw on the subset itself (rather than a sequential stream)
    makes the draw identical for any two fits that visit the same subsets, in
    particular a fit and its negated-data twin, and independent of training
    order and thread scheduling.
    """
    h = hashlib.blake2b(subset.tobytes(), digest_size=8, key=rng_key)
    rng = np.random.Generator(
        np.random.PCG64(int.from_bytes(h.digest(), "little"))
    )
    return np.sort(rng.choice(d, size=m, replace=False))


def _leaf(data: Dataset, subset: np.ndarray) -> Leaf:
    if data.task == CLASSIFICATION:
        counts = np.bincount(data.targets[subset], minlength=data.n_classes)
        stats = counts / float(subset.size)
    else:
        stats = float(np.sum(data.targets[subset]) / subset.size)
    return Leaf(stats, int(subset.size))


def _is_pure(data: Dataset, subset: np.ndarray) -> bool:
    t = data.targets[subset]
    if data.task == CLASSIFICATION:
        return bool((t == t[0]).all())
    return bool(t.min() == t.max())


def fit(data: Dataset, hp: Hyperparams, subset=None, rng_key: bytes | None = None) -> Tree:
    """Grow a tree by recursive greedy impurity-minimizing partitioning.

    A node becomes a leaf when its subset is pure, smaller than
    2*min_samples_leaf, at max_depth, or unsplittable. ``subset`` may list
    row indices with repetitions (bootstrap use). ``rng_key`` seeds the
    per-node feature subsampling; it defaults to a key derived from hp.seed.
    """
    _validate_task(data, hp)
    if subset is None:
        subset = np.arange(data.n_rows, dtype=np.int64)
    else:
        subset = np.asarray(subset, dtype=np.int64)
    if subset.size == 0:
        raise ValueError("fit requires a non-empty subset")
    if rng_key is None:
        rng_key = _default_rng_key(hp.seed)
    d = data.n_features
    if hp.n_random_features == "all":
        m = d
    else:
        m = hp.n_random_features
        if m > d:
            raise ValueError(f"n_random_features={m} exceeds feature count {d}")
    log2_table = _log2_table(subset.size) if hp.impurity == "entropy" else None

    def grow(rows: np.ndarray, depth: int):
        if (
            _is_pure(data, rows)
            or rows.size < 2 * hp.min_samples_leaf
            or (hp.max_depth is not None and depth == hp.max_depth)
        ):
            return _leaf(data, rows)
        if m == d:
            candidates = range(d)
        else:
            candidates = _sample_features(rng_key, rows, d, m)
        split = best_split(data, rows, candidates, hp, log2_table)
        if split is NO_SPLIT:
            return _leaf(data, rows)
        go_left = data.features[rows, split.feature] <= split.threshold
        left_rows = rows[go_left]
        right_rows = rows[~go_left]
        assert left_rows.size and right_rows.size, "admissible split left a child empty"
        return Internal(
            split.feature,
            split.threshold,
            grow(left_rows, depth + 1),
            grow(right_rows, depth + 1),
        )

    return Tree(
        grow(subset, 0),
        data.task,
        d,
        hp,
        data.n_classes,
    )


def predict(tree: Tree, x, op: Operator = Operator.LE):
    """Route x to a leaf under the given conditioning and return its stats.

    The two operators can disagree only when some coordinate of x equals a
    threshold on its path. Classification returns the leaf's probability
    vector (not a copy; do not mutate).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (tree.n_features,):
        raise ValueError(
            f"dimension mismatch: expected {tree.n_features} features, got {x.shape}"
        )
    node = tree.root
    if op == Operator.LE:
        while isinstance(node, Internal):
            node = node.left if x[node.feature] <= node.threshold else node.right
    else:
        while isinstance(node, Internal):
            node = node.left if x[node.feature] < node.threshold else node.right
    return node.stats


def collect_thresholds(tree: Tree) -> list[tuple[int, float]]:
    """Preorder (feature, threshold) pairs of all internal nodes."""
    out: list[tuple[int, float]] = []

    def walk(node):
        if isinstance(node, Internal):
            out.append((node.feature, node.threshold))
            walk(node.left)
            walk(node.right)

    walk(tree.root)
    return out


def _bits(x: float) -> bytes:
    return np.float64(x).tobytes()


def nodes_equal(a, b) -> bool:
    """Bitwise structural equality of two node trees."""
    if isinstance(a, Leaf) and isinstance(b, Leaf):
        if a.n_samples != b.n_samples:
            return False
        if isinstance(a.stats, np.ndarray) or isinstance(b.stats, np.ndarray):
            return (
                isinstance(a.stats, np.ndarray)
                and isinstance(b.stats, np.ndarray)
                and a.stats.shape == b.stats.shape
                and a.stats.tobytes() == b.stats.tobytes()
            )
        return _bits(a.stats) == _bits(b.stats)
    if isinstance(a, Internal) and isinstance(b, Internal):
        return (
            a.feature == b.feature
            and _bits(a.threshold) == _bits(b.threshold)
            and nodes_equal(a.left, b.left)
            and nodes_equal(a.right, b.right)
        )
    return False


def trees_equal(a: Tree, b: Tree) -> bool:
    """Node-for-node bitwise equality (structure, thresholds, leaf stats)."""
    return (
        a.task == b.task
        and a.n_features == b.n_features
        and a.n_classes == b.n_classes
        and nodes_equal(a.root, b.root)
    )
