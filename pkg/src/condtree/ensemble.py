"""Random forests and the bias-elimination prediction strategies.

A forest is a bag of operator-agnostic trees; the strategy decides how the
conditioning enters at prediction time: all-LE, all-LT, per-tree dual
averaging, half the trees LE and half LT, or training half the trees on
inverted features so plain LE inference of -x realizes strict-less semantics.
The half/half and negated-half strategies traverse exactly as many nodes as a
plain forest, which traversal_cost instruments.
"""

from __future__ import annotations

import enum
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .data import CLASSIFICATION, Dataset
from .mirror import negate_features
from .tree import Hyperparams, Internal, Operator, Tree, fit, predict

# SeedSequence spawn-key domains; distinct constants keep the per-tree
# bootstrap streams, their independent-mode variants, and fold shuffles from
# ever colliding.
_DOMAIN_BOOTSTRAP = 11
_DOMAIN_BOOTSTRAP_INDEPENDENT = 12


class Strategy(enum.Enum):
    DEFAULT_LE = "DefaultLE"
    NONDEFAULT_LT = "NonDefaultLT"
    DUAL_AVERAGE = "DualAverage"
    HALF_HALF = "HalfHalf"
    NEGATED_HALF = "NegatedHalf"


_HALF_STRATEGIES = (Strategy.HALF_HALF, Strategy.NEGATED_HALF)


@dataclass
class Forest:
    trees: list[Tree]
    operators: list[Operator]  # per-tree assignment implied by the strategy
    strategy: Strategy
    task: str
    n_features: int
    hyperparams: Hyperparams
    seed: int
    n_classes: int | None = None

    @property
    def n_estimators(self) -> int:
        return len(self.trees)


def _entropy64(seed: int) -> int:
    # SeedSequence rejects negative entropy; map the signed 64-bit seed.
    return seed & 0xFFFFFFFFFFFFFFFF


def _bootstrap_rng(seed: int, index: int, independent: bool) -> np.random.Generator:
    domain = _DOMAIN_BOOTSTRAP_INDEPENDENT if independent else _DOMAIN_BOOTSTRAP
    ss = np.random.SeedSequence(entropy=_entropy64(seed), spawn_key=(domain, index))
    return np.random.Generator(np.random.PCG64(ss))


def _tree_key(seed: int, index: int) -> bytes:
    return struct.pack("<qq", seed, index)


def resolve_n_random_features(hp: Hyperparams, data: Dataset) -> int:
    """Forest default: ceil(sqrt(d)) for classification, d for regression."""
    if hp.n_random_features != "all":
        return hp.n_random_features
    d = data.n_features
    return math.ceil(math.sqrt(d)) if data.task == CLASSIFICATION else d


def _validate_half(strategy: Strategy, n_estimators: int) -> None:
    if strategy in _HALF_STRATEGIES and n_estimators % 2:
        raise ValueError(f"{strategy.value} requires an even number of estimators")


def strategy_operators(strategy: Strategy, n_estimators: int) -> list[Operator]:
    """Per-tree inference operators implied by the strategy."""
    if strategy is Strategy.NONDEFAULT_LT:
        return [Operator.LT] * n_estimators
    if strategy is Strategy.HALF_HALF:
        half = n_estimators // 2
        return [Operator.LE] * half + [Operator.LT] * (n_estimators - half)
    return [Operator.LE] * n_estimators


def fit_forest(
    data: Dataset,
    n_estimators: int,
    hp: Hyperparams,
    strategy: Strategy = Strategy.DEFAULT_LE,
    independent_bootstrap: bool = False,
    n_threads: int = 1,
) -> Forest:
    """Train n_estimators bootstrap trees with per-node feature subsampling.

    Every slot draws its bootstrap (N rows with replacement) and its node
    sampling key deterministically from (hp.seed, slot index), so the forest
    is bit-identical for any thread count. Under NegatedHalf, slots >= N_e/2
    train on inverted features with the bootstrap indices the slot would
    receive anyway; independent_bootstrap=True gives those slots separate
    bootstrap streams instead.
    """
    if n_estimators < 1:
        raise ValueError("n_estimators must be >= 1")
    _validate_half(strategy, n_estimators)
    tree_hp = replace(hp, n_random_features=resolve_n_random_features(hp, data))
    half = n_estimators // 2
    negated_data = (
        negate_features(data) if strategy is Strategy.NEGATED_HALF else None
    )

    def train_slot(i: int) -> Tree:
        negated = strategy is Strategy.NEGATED_HALF and i >= half
        rng = _bootstrap_rng(hp.seed, i, independent_bootstrap and negated)
        rows = rng.integers(0, data.n_rows, size=data.n_rows, dtype=np.int64)
        if negated:
            t = fit(negated_data, tree_hp, subset=rows, rng_key=_tree_key(hp.seed, i))
            t.trained_on_negated = True
            return t
        return fit(data, tree_hp, subset=rows, rng_key=_tree_key(hp.seed, i))

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            trees = list(pool.map(train_slot, range(n_estimators)))
    else:
        trees = [train_slot(i) for i in range(n_estimators)]

    return Forest(
        trees,
        strategy_operators(strategy, n_estimators),
        strategy,
        data.task,
        data.n_features,
        tree_hp,
        hp.seed,
        data.n_classes,
    )


def predict_integrated(tree: Tree, x):
    """Componentwise mean of the LE and LT predictions of one tree."""
    le = predict(tree, x, Operator.LE)
    lt = predict(tree, x, Operator.LT)
    return (le + lt) / 2.0


def _check_strategy(forest: Forest, strategy: Strategy) -> None:
    trained_negated = forest.strategy is Strategy.NEGATED_HALF
    if (strategy is Strategy.NEGATED_HALF) != trained_negated:
        raise ValueError(
            f"cannot predict with {strategy.value} on a forest trained with "
            f"{forest.strategy.value}"
        )
    _validate_half(strategy, forest.n_estimators)


def _tree_predictions(forest: Forest, x, strategy: Strategy):
    half = forest.n_estimators // 2
    neg_x = None
    for i, t in enumerate(forest.trees):
        if strategy is Strategy.DEFAULT_LE:
            yield predict(t, x, Operator.LE)
        elif strategy is Strategy.NONDEFAULT_LT:
            yield predict(t, x, Operator.LT)
        elif strategy is Strategy.HALF_HALF:
            op = Operator.LE if i < half else Operator.LT
            yield predict(t, x, op)
        else:  # NEGATED_HALF
            if t.trained_on_negated:
                if neg_x is None:
                    neg_x = -np.asarray(x, dtype=np.float64)
                yield predict(t, neg_x, Operator.LE)
            else:
                yield predict(t, x, Operator.LE)


def predict_forest(forest: Forest, x, strategy: Strategy | None = None):
    """Unweighted mean of the per-tree predictions under the strategy.

    Classification returns the averaged probability vector (averaging
    preserves the unit sum, so no renormalization happens).
    """
    if strategy is None:
        strategy = forest.strategy
    _check_strategy(forest, strategy)
    if strategy is Strategy.DUAL_AVERAGE:
        # Literally the mean of the two single-operator forest predictions,
        # so the averaging identity holds bitwise on every input.
        le = predict_forest(forest, x, Strategy.DEFAULT_LE)
        lt = predict_forest(forest, x, Strategy.NONDEFAULT_LT)
        return (le + lt) / 2.0
    preds = _tree_predictions(forest, x, strategy)
    if forest.task == CLASSIFICATION:
        acc = np.zeros(forest.n_classes, dtype=np.float64)
        for p in preds:
            acc += p
        return acc / forest.n_estimators
    total = 0.0
    for p in preds:
        total += p
    return total / forest.n_estimators


def _walk_count(tree: Tree, x, op: Operator) -> int:
    node = tree.root
    count = 1
    lt = op is Operator.LT
    while isinstance(node, Internal):
        v = x[node.feature]
        go_left = v < node.threshold if lt else v <= node.threshold
        node = node.left if go_left else node.right
        count += 1
    return count


def traversal_cost(forest: Forest, x, strategy: Strategy | None = None) -> int:
    """Exact number of node visits (leaves included) for one prediction."""
    if strategy is None:
        strategy = forest.strategy
    _check_strategy(forest, strategy)
    x = np.asarray(x, dtype=np.float64)
    half = forest.n_estimators // 2
    total = 0
    for i, t in enumerate(forest.trees):
        if strategy is Strategy.DUAL_AVERAGE:
            total += _walk_count(t, x, Operator.LE) + _walk_count(t, x, Operator.LT)
        elif strategy is Strategy.NONDEFAULT_LT:
            total += _walk_count(t, x, Operator.LT)
        elif strategy is Strategy.HALF_HALF:
            total += _walk_count(t, x, Operator.LE if i < half else Operator.LT)
        elif strategy is Strategy.NEGATED_HALF and t.trained_on_negated:
            total += _walk_count(t, -x, Operator.LE)
        else:
            total += _walk_count(t, x, Operator.LE)
    return total
