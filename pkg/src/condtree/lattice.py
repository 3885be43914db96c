"""Lattice-feature detection and threshold/domain-value collision auditing.

A feature is lattice-valued when some observed value is the exact mid-point
of two distinct observed values; mid-point thresholds on such features can
land exactly on observed values, which is what makes the conditioning choice
observable. Membership and collision are tested by exact float equality on
purpose: the phenomenon is literal coincidence, and tolerant matching would
manufacture collisions that do not exist.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .ensemble import Forest
from .tree import Internal, Tree


@dataclass
class LatticeReport:
    is_lattice: list[bool]  # per feature
    n_lattice: int
    proportion: float


@dataclass
class CollisionReport:
    n_internal_nodes: int
    n_colliding: int
    rho: float  # n_colliding / n_internal_nodes, 0 when there are no nodes


def is_lattice_feature(values) -> bool:
    """True iff some observed value is the exact mid-point of two others.

    Works on the deduplicated value set, so it is permutation- and
    duplication-invariant.
    """
    u = np.unique(np.asarray(values, dtype=np.float64))
    if u.size < 3:
        return False
    members = set(u.tolist())
    for i in range(u.size - 1):
        for j in range(i + 1, u.size):
            if (u[i] + u[j]) / 2.0 in members:
                return True
    return False


def lattice_report(data: Dataset) -> LatticeReport:
    """Per-feature lattice flags plus their count and proportion."""
    flags = [
        is_lattice_feature(data.features[:, f]) for f in range(data.n_features)
    ]
    n = sum(flags)
    return LatticeReport(flags, n, n / data.n_features)


def _iter_tree_nodes(tree: Tree):
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if isinstance(node, Internal):
            yield node
            stack.append(node.right)
            stack.append(node.left)


def threshold_collision_ratio(model, data: Dataset) -> CollisionReport:
    """Proportion of internal nodes whose threshold equals an observed value.

    ``data`` supplies the reference domain values per feature. Forest nodes
    are pooled across trees. Thresholds of negated-trained trees live in
    inverted coordinates, so their sign is flipped before the comparison.
    """
    trees = model.trees if isinstance(model, Forest) else [model]
    observed: dict[int, set] = {}
    total = 0
    colliding = 0
    for t in trees:
        flip = -1.0 if t.trained_on_negated else 1.0
        for node in _iter_tree_nodes(t):
            total += 1
            if node.feature not in observed:
                observed[node.feature] = set(
                    data.features[:, node.feature].tolist()
                )
            if flip * node.threshold in observed[node.feature]:
                colliding += 1
    rho = colliding / total if total else 0.0
    return CollisionReport(total, colliding, rho)
