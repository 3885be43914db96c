"""Independent brute-force oracles and random generators for the test suite.

Everything here is written against the definitions, not against the package
internals: plain-Python impurity formulas, exhaustive split enumeration,
full sign-assignment enumeration for the signed-rank test, pair counting for
AUC, and an all-triples lattice scan. Tests freeze comparisons between these
and the package implementations.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from condtree.data import CLASSIFICATION, REGRESSION, Dataset
from condtree.tree import Hyperparams, Internal, Leaf, Tree

# ---------------------------------------------------------------------------
# Impurities, from the textbook formulas.


def oracle_gini(labels) -> float:
    labels = list(labels)
    n = len(labels)
    out = 1.0
    for c in sorted(set(labels)):
        p = labels.count(c) / n
        out -= p * p
    return out


def oracle_entropy(labels) -> float:
    labels = list(labels)
    n = len(labels)
    out = 0.0
    for c in sorted(set(labels)):
        p = labels.count(c) / n
        out -= p * math.log2(p)
    return out


def oracle_variance(values) -> float:
    values = [float(v) for v in values]
    n = len(values)
    mean = sum(values) / n
    return sum((v - mean) ** 2 for v in values) / n


def _oracle_impurity(name: str, targets) -> float:
    if name == "gini":
        return oracle_gini(targets)
    if name == "entropy":
        return oracle_entropy(targets)
    return oracle_variance(targets)


# ---------------------------------------------------------------------------
# Exhaustive split search. Semantics: thresholds are literal mid-points of
# consecutive distinct sorted values, boundaries whose mid-point rounds onto
# either neighbour are skipped, children must satisfy the leaf minimum, and
# ties resolve to the lowest feature index then the lowest boundary rank
# (1-based size of the left partition).


def oracle_split_candidates(data: Dataset, subset, hp: Hyperparams, candidate_features=None):
    """Every legal (feature, k_star, threshold, score) in (feature, k) order."""
    subset = list(subset)
    n = len(subset)
    if candidate_features is None:
        candidate_features = range(data.n_features)
    out = []
    for f in sorted(candidate_features):
        values = sorted(float(data.features[r, f]) for r in subset)
        order = sorted(subset, key=lambda r: float(data.features[r, f]))
        targets = [data.targets[r] for r in order]
        for k in range(1, n):
            a, b = values[k - 1], values[k]
            if a == b:
                continue
            t = (a + b) / 2.0
            if not (a < t < b):
                continue
            if k < hp.min_samples_leaf or n - k < hp.min_samples_leaf:
                continue
            il = _oracle_impurity(hp.impurity, targets[:k])
            ir = _oracle_impurity(hp.impurity, targets[k:])
            if hp.weighted_impurity:
                score = (k * il + (n - k) * ir) / n
            else:
                score = il + ir
            out.append((f, k, t, score))
    return out


def oracle_best_split(data: Dataset, subset, hp: Hyperparams, candidate_features=None):
    """(feature, threshold, k_star, score) of the best split, or None."""
    best = None  # (score, feature, k_star, threshold)
    for f, k, t, score in oracle_split_candidates(data, subset, hp, candidate_features):
        if best is None or score < best[0]:
            best = (score, f, k, t)
    if best is None:
        return None
    return best[1], best[3], best[2], best[0]


def oracle_fit_is_tie_free(data: Dataset, hp: Hyperparams, rel_margin: float = 1e-9) -> bool:
    """True when every node of a greedy fit has a unique best split.

    Recursively re-runs the exhaustive enumeration, checking at every node
    that the winning score beats every other candidate by a relative margin
    (so negation-reversed summation order cannot flip the choice), and that
    no other boundary of the winning feature ties it.
    """
    def node_ok(subset, depth) -> bool:
        n = len(subset)
        targets = [data.targets[r] for r in subset]
        if len(set(map(float, targets))) <= 1:
            return True
        if n < 2 * hp.min_samples_leaf:
            return True
        if hp.max_depth is not None and depth == hp.max_depth:
            return True
        scored = []
        for f in range(data.n_features):
            order = sorted(subset, key=lambda r: float(data.features[r, f]))
            values = [float(data.features[r, f]) for r in order]
            ordered_targets = [data.targets[r] for r in order]
            for k in range(1, n):
                a, b = values[k - 1], values[k]
                if a == b:
                    continue
                t = (a + b) / 2.0
                if not (a < t < b):
                    continue
                if k < hp.min_samples_leaf or n - k < hp.min_samples_leaf:
                    continue
                il = _oracle_impurity(hp.impurity, ordered_targets[:k])
                ir = _oracle_impurity(hp.impurity, ordered_targets[k:])
                if hp.weighted_impurity:
                    score = (k * il + (n - k) * ir) / n
                else:
                    score = il + ir
                scored.append((score, f, k, t))
        if not scored:
            return True
        scored.sort(key=lambda s: s[0])
        best_score, f_star, _, t_star = scored[0]
        if len(scored) > 1:
            runner = scored[1][0]
            scale = max(abs(best_score), abs(runner), 1e-30)
            if (runner - best_score) / scale < rel_margin:
                return False
        left = [r for r in subset if float(data.features[r, f_star]) <= t_star]
        right = [r for r in subset if float(data.features[r, f_star]) > t_star]
        return node_ok(left, depth + 1) and node_ok(right, depth + 1)

    return node_ok(list(range(data.n_rows)), 0)


# ---------------------------------------------------------------------------
# Signed-rank test by explicit enumeration (n <= ~14) and by an independent
# dict-based convolution (any n), both over mid-ranked absolute differences.


def _oracle_midranks(values):
    pairs = sorted((v, i) for i, v in enumerate(values))
    ranks = [0.0] * len(values)
    i = 0
    while i < len(pairs):
        j = i
        while j + 1 < len(pairs) and pairs[j + 1][0] == pairs[i][0]:
            j += 1
        mean_rank = (i + j + 2) / 2.0
        for _, idx in pairs[i : j + 1]:
            ranks[idx] = mean_rank
        i = j + 1
    return ranks


def oracle_wilcoxon_enum(diffs, alternative: str):
    """(W+, p) by listing all 2^n sign assignments of the nonzero diffs."""
    d = [float(x) for x in diffs if x != 0.0]
    n = len(d)
    if n == 0:
        return 0.0, 1.0
    ranks = _oracle_midranks([abs(x) for x in d])
    w_obs = sum(r for r, x in zip(ranks, d) if x > 0)
    ge = le = 0
    total = 0
    for signs in itertools.product((0, 1), repeat=n):
        w = sum(r for r, s in zip(ranks, signs) if s)
        total += 1
        if w >= w_obs:
            ge += 1
        if w <= w_obs:
            le += 1
    p_ge = ge / total
    p_le = le / total
    if alternative == "greater":
        return w_obs, p_ge
    return w_obs, min(1.0, 2.0 * min(p_ge, p_le))


def oracle_wilcoxon_exact_dp(diffs, alternative: str):
    """Same distribution via a dictionary convolution over doubled ranks."""
    d = [float(x) for x in diffs if x != 0.0]
    n = len(d)
    if n == 0:
        return 0.0, 1.0
    ranks = _oracle_midranks([abs(x) for x in d])
    w_obs = sum(r for r, x in zip(ranks, d) if x > 0)
    doubled = [int(round(2 * r)) for r in ranks]
    counts = {0: 1}
    for w in doubled:
        nxt = dict(counts)
        for value, c in counts.items():
            nxt[value + w] = nxt.get(value + w, 0) + c
        counts = nxt
    w2 = int(round(2 * w_obs))
    total = 2**n
    p_ge = sum(c for v, c in counts.items() if v >= w2) / total
    p_le = sum(c for v, c in counts.items() if v <= w2) / total
    if alternative == "greater":
        return w_obs, p_ge
    return w_obs, min(1.0, 2.0 * min(p_ge, p_le))


# ---------------------------------------------------------------------------
# AUC by pair counting; r2 by the definition with plain-Python sums.


def oracle_auc_pairs(scores, labels) -> float:
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1.0
            elif sp == sn:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def oracle_r2(predictions, targets) -> float:
    targets = [float(t) for t in targets]
    predictions = [float(p) for p in predictions]
    mean = sum(targets) / len(targets)
    sst = sum((t - mean) ** 2 for t in targets)
    sse = sum((t - p) ** 2 for t, p in zip(targets, predictions))
    return 1.0 - sse / sst


# ---------------------------------------------------------------------------
# Lattice membership by scanning all value triples.


def oracle_is_lattice(values) -> bool:
    u = sorted(set(float(v) for v in values))
    for a, m, b in itertools.combinations(u, 3):
        if (a + b) / 2.0 == m:
            return True
    return False


# ---------------------------------------------------------------------------
# Random generators.


def random_tree(rng: np.random.Generator, task: str, n_features: int, max_depth: int,
                n_classes: int = 2) -> Tree:
    """A random tree with thresholds spanning negatives, zeros, and ties."""

    def build(depth: int):
        if depth >= max_depth or rng.random() < 0.25:
            if task == CLASSIFICATION:
                probs = rng.dirichlet(np.ones(n_classes))
                return Leaf(stats=np.asarray(probs, dtype=np.float64),
                            n_samples=int(rng.integers(1, 30)))
            return Leaf(stats=float(rng.normal() * 10), n_samples=int(rng.integers(1, 30)))
        threshold = float(rng.choice([
            rng.normal() * 5,
            float(rng.integers(-4, 5)),
            0.0,
            (float(rng.integers(-8, 9)) + float(rng.integers(-8, 9))) / 2.0,
        ]))
        return Internal(
            feature=int(rng.integers(0, n_features)),
            threshold=threshold,
            left=build(depth + 1),
            right=build(depth + 1),
        )

    root = build(0)
    if isinstance(root, Leaf):
        root = Internal(feature=0, threshold=0.5, left=root, right=build(max_depth - 1))
    return Tree(
        root=root,
        task=task,
        n_features=n_features,
        hyperparams=Hyperparams(
            impurity="variance" if task == REGRESSION else "gini"
        ),
        n_classes=n_classes if task == CLASSIFICATION else None,
    )


def random_dataset(rng: np.random.Generator, task: str, n_rows: int, n_features: int,
                   n_classes: int = 2, tie_prone: bool = False) -> Dataset:
    """Random dataset; tie_prone=True uses small-integer features."""
    if tie_prone:
        features = rng.integers(0, 5, size=(n_rows, n_features)).astype(np.float64)
    else:
        features = rng.normal(size=(n_rows, n_features)) * 10.0
    if task == CLASSIFICATION:
        targets = rng.integers(0, n_classes, size=n_rows).astype(np.int64)
        if np.unique(targets).size < 2:
            targets[0] = 0
            targets[-1] = 1
        labels = [str(c) for c in range(n_classes)]
        return Dataset(
            features=features,
            targets=targets,
            task=CLASSIFICATION,
            feature_names=[f"x{j}" for j in range(n_features)],
            n_classes=n_classes,
            class_labels=labels,
        )
    targets = rng.normal(size=n_rows) * 5.0
    return Dataset(
        features=features,
        targets=targets.astype(np.float64),
        task=REGRESSION,
        feature_names=[f"x{j}" for j in range(n_features)],
        n_classes=None,
        class_labels=None,
    )


def tree_probe_inputs(rng: np.random.Generator, tree: Tree, n_inputs: int) -> np.ndarray:
    """Probe points mixing random values with exact-threshold hits."""
    thresholds = [
        (node.feature, node.threshold)
        for node in _walk_internal(tree.root)
    ]
    X = rng.normal(size=(n_inputs, tree.n_features)) * 6.0
    for i in range(n_inputs):
        if thresholds and rng.random() < 0.7:
            for _ in range(1 + int(rng.integers(0, 3))):
                f, t = thresholds[int(rng.integers(0, len(thresholds)))]
                X[i, f] = t
    return X


def _walk_internal(node):
    stack = [node]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Internal):
            yield cur
            stack.append(cur.left)
            stack.append(cur.right)
