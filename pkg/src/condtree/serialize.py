"""Versioned JSON round-trip for trees and forests.

The document layout is canonical — sorted keys, compact separators, and
shortest round-trip decimal rendering of floats — so that
serialize → deserialize → serialize reproduces the byte-identical text and
thresholds survive bit-exactly.

Node schema:
    internal: {"f": int, "t": number, "l": node, "r": node}
    leaf:     {"leaf": [class probabilities] | number, "n": int}

A tree trained on additively inverted features carries ``"negated": true``.
"""

from __future__ import annotations

import json

import numpy as np

from .data import CLASSIFICATION, TASKS
from .ensemble import Forest, Strategy, strategy_operators
from .errors import ModelFormatError
from .tree import Hyperparams, Internal, Leaf, Tree

FORMAT_VERSION = 1

_HP_FIELDS = (
    "min_samples_leaf",
    "max_depth",
    "impurity",
    "n_random_features",
    "seed",
    "weighted_impurity",
)


def _node_to_obj(node, task: str):
    if isinstance(node, Leaf):
        if task == CLASSIFICATION:
            value = [float(p) for p in node.stats]
        else:
            value = float(node.stats)
        return {"leaf": value, "n": int(node.n_samples)}
    return {
        "f": int(node.feature),
        "t": float(node.threshold),
        "l": _node_to_obj(node.left, task),
        "r": _node_to_obj(node.right, task),
    }


def _fail(path: str, why: str):
    raise ModelFormatError(f"malformed node at {path}: {why}")


def _check_number(value, path: str, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"{what} must be a number")
    out = float(value)
    if not np.isfinite(out):
        _fail(path, f"{what} must be finite")
    return out


def _node_from_obj(obj, task: str, n_classes, n_features: int, path: str):
    if not isinstance(obj, dict):
        _fail(path, "node must be an object")
    keys = set(obj)
    if keys == {"leaf", "n"}:
        n = obj["n"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            _fail(path, '"n" must be a positive integer')
        value = obj["leaf"]
        if task == CLASSIFICATION:
            if not isinstance(value, list) or len(value) != n_classes:
                _fail(path, f'"leaf" must list {n_classes} class probabilities')
            probs = [_check_number(p, path, "class probability") for p in value]
            if any(p < 0.0 or p > 1.0 for p in probs):
                _fail(path, "class probabilities must lie in [0, 1]")
            stats = np.asarray(probs, dtype=np.float64)
        else:
            stats = _check_number(value, path, '"leaf"')
        return Leaf(stats=stats, n_samples=n)
    if keys == {"f", "t", "l", "r"}:
        f = obj["f"]
        if isinstance(f, bool) or not isinstance(f, int):
            _fail(path, '"f" must be an integer')
        if f < 0 or f >= n_features:
            _fail(path, f'feature index {f} out of range [0, {n_features})')
        t = _check_number(obj["t"], path, '"t"')
        return Internal(
            feature=f,
            threshold=t,
            left=_node_from_obj(obj["l"], task, n_classes, n_features, path + ".l"),
            right=_node_from_obj(obj["r"], task, n_classes, n_features, path + ".r"),
        )
    _fail(path, 'expected exactly keys {"f","t","l","r"} or {"leaf","n"}')


def _hp_to_obj(hp: Hyperparams) -> dict:
    return {name: getattr(hp, name) for name in _HP_FIELDS}


def _hp_from_obj(obj, where: str) -> Hyperparams:
    if not isinstance(obj, dict) or set(obj) != set(_HP_FIELDS):
        raise ModelFormatError(f"{where}: hyperparams must have exactly fields {sorted(_HP_FIELDS)}")
    try:
        return Hyperparams(**obj)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"{where}: invalid hyperparams: {exc}") from None


def _tree_entry(tree: Tree) -> dict:
    entry = {"root": _node_to_obj(tree.root, tree.task)}
    if tree.trained_on_negated:
        entry["negated"] = True
    return entry


def serialize_model(model) -> str:
    """Render a Tree or Forest as canonical versioned JSON text."""
    if isinstance(model, Tree):
        doc = {
            "version": FORMAT_VERSION,
            "kind": "tree",
            "task": model.task,
            "n_classes": model.n_classes,
            "n_features": model.n_features,
            "hyperparams": _hp_to_obj(model.hyperparams),
        }
        doc.update(_tree_entry(model))
    elif isinstance(model, Forest):
        doc = {
            "version": FORMAT_VERSION,
            "kind": "forest",
            "task": model.task,
            "n_classes": model.n_classes,
            "n_features": model.n_features,
            "seed": model.seed,
            "strategy": model.strategy.value,
            "hyperparams": _hp_to_obj(model.hyperparams),
            "trees": [_tree_entry(t) for t in model.trees],
        }
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _reject_constant(token):
    raise ModelFormatError(f"non-finite JSON constant '{token}' is not allowed")


def _common_header(doc) -> tuple[str, object, int]:
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {version!r} (expected {FORMAT_VERSION})"
        )
    task = doc.get("task")
    if task not in TASKS:
        raise ModelFormatError(f"unknown task {task!r}")
    n_classes = doc.get("n_classes")
    if task == CLASSIFICATION:
        if isinstance(n_classes, bool) or not isinstance(n_classes, int) or n_classes < 2:
            raise ModelFormatError("classification model requires integer n_classes >= 2")
    elif n_classes is not None:
        raise ModelFormatError("regression model must have n_classes null")
    n_features = doc.get("n_features")
    if isinstance(n_features, bool) or not isinstance(n_features, int) or n_features < 1:
        raise ModelFormatError("n_features must be a positive integer")
    return task, n_classes, n_features


def _negated_flag(entry, where: str) -> bool:
    negated = entry.get("negated", False)
    if negated is not True and negated is not False:
        raise ModelFormatError(f'{where}: "negated" must be true when present')
    return bool(negated)


def deserialize_model(text: str):
    """Parse canonical JSON text back into a Tree or Forest, validating it."""
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid JSON: {exc}") from None
    task, n_classes, n_features = _common_header(doc)
    kind = doc.get("kind")
    if kind == "tree":
        expected = {"version", "kind", "task", "n_classes", "n_features", "hyperparams", "root"}
        if not expected <= set(doc) or set(doc) - expected - {"negated"}:
            raise ModelFormatError(f"tree document must have exactly fields {sorted(expected)} (plus optional 'negated')")
        hp = _hp_from_obj(doc["hyperparams"], "tree")
        tree = Tree(
            root=_node_from_obj(doc["root"], task, n_classes, n_features, "root"),
            task=task,
            n_features=n_features,
            hyperparams=hp,
            n_classes=n_classes,
            trained_on_negated=_negated_flag(doc, "tree"),
        )
        return tree
    if kind == "forest":
        expected = {
            "version",
            "kind",
            "task",
            "n_classes",
            "n_features",
            "seed",
            "strategy",
            "hyperparams",
            "trees",
        }
        if set(doc) != expected:
            raise ModelFormatError(f"forest document must have exactly fields {sorted(expected)}")
        try:
            strategy = Strategy(doc["strategy"])
        except ValueError:
            raise ModelFormatError(f"unknown strategy {doc['strategy']!r}") from None
        seed = doc["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ModelFormatError("seed must be an integer")
        hp = _hp_from_obj(doc["hyperparams"], "forest")
        entries = doc["trees"]
        if not isinstance(entries, list) or not entries:
            raise ModelFormatError("trees must be a non-empty list")
        trees = []
        for i, entry in enumerate(entries):
            where = f"trees[{i}]"
            if not isinstance(entry, dict) or not {"root"} <= set(entry) or set(entry) - {"root", "negated"}:
                raise ModelFormatError(f'{where}: expected {{"root": node}} with optional "negated"')
            trees.append(
                Tree(
                    root=_node_from_obj(entry["root"], task, n_classes, n_features, f"{where}.root"),
                    task=task,
                    n_features=n_features,
                    hyperparams=hp,
                    n_classes=n_classes,
                    trained_on_negated=_negated_flag(entry, where),
                )
            )
        _check_negation_pattern(strategy, trees)
        return Forest(
            trees=trees,
            operators=strategy_operators(strategy, len(trees)),
            strategy=strategy,
            task=task,
            n_features=n_features,
            hyperparams=hp,
            seed=seed,
            n_classes=n_classes,
        )
    raise ModelFormatError(f"unknown model kind {kind!r}")


def _check_negation_pattern(strategy: Strategy, trees) -> None:
    flags = [t.trained_on_negated for t in trees]
    if strategy in (Strategy.HALF_HALF, Strategy.NEGATED_HALF) and len(trees) % 2:
        raise ModelFormatError(f"{strategy.value} forest must have an even tree count")
    if strategy is Strategy.NEGATED_HALF:
        half = len(trees) // 2
        if any(flags[:half]) or not all(flags[half:]):
            raise ModelFormatError(
                "NegatedHalf forest must negate exactly the second half of its trees"
            )
    elif any(flags):
        raise ModelFormatError(f"{strategy.value} forest must not contain negated-trained trees")
