"""Tree mirroring and the equivalence routes for non-default inference.

Mirroring swaps every node's children and negates every threshold. Because
floating-point negation is exact and ``x < t`` iff ``not (-x <= -t)``,
predict(T, x, LT) equals predict(mirror(T), -x, LE) bitwise for every tree
and input. A tree fitted to the additively inverted features equals the
mirror of the original fit node-for-node whenever no split score ties occur;
with ties, only prediction-level equivalence under the documented tie-break
is guaranteed, because the (feature, rank) tie-break is not symmetric under
negation.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .tree import Hyperparams, Internal, Leaf, Operator, Tree, fit, predict


def _mirror_node(node):
    if isinstance(node, Leaf):
        return Leaf(node.stats, node.n_samples)
    return Internal(
        node.feature,
        -node.threshold,
        _mirror_node(node.right),
        _mirror_node(node.left),
    )


def mirror(tree: Tree) -> Tree:
    """A new tree with children swapped and thresholds negated at every node.

    Applying it twice restores the original node-for-node.
    """
    return Tree(
        _mirror_node(tree.root),
        tree.task,
        tree.n_features,
        tree.hyperparams,
        tree.n_classes,
        tree.trained_on_negated,
    )


def negate_features(data: Dataset) -> Dataset:
    """The dataset with every feature value additively inverted."""
    return Dataset(
        features=-data.features,
        targets=data.targets,
        task=data.task,
        feature_names=data.feature_names,
        n_classes=data.n_classes,
        class_labels=data.class_labels,
    )


def predict_nondefault(tree: Tree, x):
    """Prediction under the non-default conditioning (x < t).

    Computed through both available routes - direct strict-less inference and
    LE inference of -x on the mirrored tree - which must agree bitwise; the
    agreement is asserted on every call.
    """
    direct = predict(tree, x, Operator.LT)
    mirrored = predict(mirror(tree), -np.asarray(x, dtype=np.float64), Operator.LE)
    if isinstance(direct, np.ndarray):
        agree = direct.tobytes() == mirrored.tobytes()
    else:
        agree = np.float64(direct).tobytes() == np.float64(mirrored).tobytes()
    assert agree, "strict-less inference and mirrored-negated inference diverged"
    return direct


def fit_on_negated(
    data: Dataset, hp: Hyperparams, subset=None, rng_key: bytes | None = None
) -> Tree:
    """Fit on the additively inverted features (targets untouched).

    The per-node feature sampling is keyed by subset rows, so this visits the
    same candidate features as the plain fit whenever the two recursions
    induce the same partitions. The returned tree is flagged as
    negated-trained: its thresholds live in negated coordinates.
    """
    out = fit(negate_features(data), hp, subset=subset, rng_key=rng_key)
    out.trained_on_negated = True
    return out
