"""Benchmark the split-scan backends (numba JIT vs pure-numpy fallback).

Times a kernel-heavy single split search and a full tree fit on synthetic
data under both backends and reports medians plus the speedup. The same
selection is available at import time via the CONDTREE_BACKEND environment
variable ("numba" or "numpy").

Usage: python benchmarks/bench_split.py [--rows N] [--features D] [--repeats R]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from condtree import backend
from condtree.data import CLASSIFICATION, REGRESSION, Dataset
from condtree.tree import Hyperparams, best_split, fit


def make_data(task: str, n_rows: int, n_features: int, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    features = rng.normal(size=(n_rows, n_features)) * 10.0
    if task == CLASSIFICATION:
        targets = (features[:, 0] + rng.normal(size=n_rows) > 0).astype(np.int64)
        return Dataset(
            features=features,
            targets=targets,
            task=task,
            feature_names=[f"x{j}" for j in range(n_features)],
            n_classes=2,
            class_labels=["0", "1"],
        )
    targets = features[:, 0] * 2.0 + rng.normal(size=n_rows)
    return Dataset(
        features=features,
        targets=targets,
        task=task,
        feature_names=[f"x{j}" for j in range(n_features)],
    )


def timed(fn, repeats: int) -> float:
    fn()  # warm-up: first numba call pays JIT/caching cost
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def run(args) -> None:
    cases = {
        "split scan (gini)": (
            make_data(CLASSIFICATION, args.rows, args.features, args.seed),
            Hyperparams(min_samples_leaf=1),
            True,
        ),
        "split scan (variance)": (
            make_data(REGRESSION, args.rows, args.features, args.seed + 1),
            Hyperparams(min_samples_leaf=1, impurity="variance"),
            True,
        ),
        "full fit (gini)": (
            make_data(CLASSIFICATION, args.rows, args.features, args.seed + 2),
            Hyperparams(min_samples_leaf=max(1, args.rows // 200)),
            False,
        ),
    }

    original = backend.active_backend()
    results: dict[str, dict[str, float]] = {name: {} for name in cases}
    try:
        for name in ("numba", "numpy"):
            try:
                backend.set_backend(name)
            except Exception as exc:  # numba missing in minimal installs
                print(f"[skip] backend {name}: {exc}")
                continue
            for label, (data, hp, scan_only) in cases.items():
                subset = np.arange(data.n_rows)
                if scan_only:
                    task = lambda: best_split(data, subset, range(data.n_features), hp)
                else:
                    task = lambda: fit(data, hp)
                results[label][name] = timed(task, args.repeats)
    finally:
        backend.set_backend(original)

    width = max(len(label) for label in cases)
    print(
        f"\nrows={args.rows} features={args.features} "
        f"repeats={args.repeats} (median seconds)"
    )
    header = f"{'case':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, timings in results.items():
        nb = timings.get("numba")
        npy = timings.get("numpy")
        nb_s = f"{nb:.6f}" if nb is not None else "n/a"
        npy_s = f"{npy:.6f}" if npy is not None else "n/a"
        speed = f"{npy / nb:6.2f}x" if nb and npy else "n/a"
        print(f"{label:<{width}}  {nb_s:>10}  {npy_s:>10}  {speed:>8}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=20000)
    parser.add_argument("--features", type=int, default=8)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    run(args)


if __name__ == "__main__":
    main()
