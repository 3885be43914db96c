"""Data model, CSV ingestion, and the preprocessing pipeline.

Preprocessing is deliberately minimal and deterministic: most-frequent
imputation, one-hot encoding for small categorical domains (at most 5
categories), integer codes for larger ones, and no standardization.
Identical input files always yield bit-identical datasets.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

CLASSIFICATION = "classification"
REGRESSION = "regression"
TASKS = (CLASSIFICATION, REGRESSION)

# Cells that mark a missing value (UCI convention), after stripping.
_MISSING_CELLS = ("", "?")


class _Missing:
    """Sentinel for a missing cell in a raw column."""

    __slots__ = ()

    def __repr__(self):  # pragma: no cover - repr only
        return "MISSING"


MISSING = _Missing()


@dataclass
class RawColumn:
    """A single pre-processing column: declared kind plus raw values.

    ``values`` entries are floats (numeric), strings (categorical), or the
    MISSING sentinel. MISSING is only allowed before imputation.
    """

    name: str
    kind: str  # "numeric" or "categorical"
    values: list

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical"):
            raise DataError(f"column '{self.name}': unknown kind '{self.kind}'")


@dataclass
class Dataset:
    """Rectangular numeric feature matrix plus targets, post-preprocessing.

    Classification targets are contiguous class indices 0..C-1, re-coded by
    the sorted order of the original label values; ``class_labels`` keeps the
    originals in that order.
    """

    features: np.ndarray  # (N, d) float64, finite
    targets: np.ndarray  # (N,) float64 (regression) or int64 (classification)
    task: str
    feature_names: list[str] = field(default_factory=list)
    n_classes: int | None = None
    class_labels: list | None = None

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, rows) -> "Dataset":
        """Row-sliced view-like copy; class coding is preserved from the parent."""
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(
            features=self.features[rows],
            targets=self.targets[rows],
            task=self.task,
            feature_names=self.feature_names,
            n_classes=self.n_classes,
            class_labels=self.class_labels,
        )


def _parse_numeric(cell: str, line: int, column: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise DataError(
            f"unparseable numeric cell '{cell}' at line {line}, column '{column}'"
        ) from None


def load_csv(path, schema: dict):
    """Read a CSV file into raw columns plus the raw target vector.

    ``schema`` is a dict: {"columns": [{"name", "kind"}], "target": name,
    "task": task}. The header row is mandatory; every non-target column in
    the file must be declared in the schema. Empty cells and "?" mark
    MISSING. Returns (columns, raw_targets, task).
    """
    task = schema.get("task")
    if task not in TASKS:
        raise DataError(f"schema task must be one of {TASKS}, got {task!r}")
    target_name = schema.get("target")
    if not target_name:
        raise DataError("schema does not declare a target column")
    kinds = {c["name"]: c["kind"] for c in schema.get("columns", [])}

    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read '{path}': {exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"'{path}' is empty (no header row)") from None
        header = [h.strip() for h in header]
        if target_name not in header:
            raise DataError(f"unknown target column '{target_name}' in '{path}'")
        target_pos = header.index(target_name)
        feature_names = [h for i, h in enumerate(header) if i != target_pos]
        for name in feature_names:
            if name not in kinds:
                raise DataError(f"column '{name}' not declared in schema")

        columns = [RawColumn(name, kinds[name], []) for name in feature_names]
        raw_targets = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"line {line_no}: expected {len(header)} cells, got {len(row)}"
                )
            cells = [c.strip() for c in row]
            target_cell = cells.pop(target_pos)
            if target_cell in _MISSING_CELLS:
                raise DataError(
                    f"missing target value at line {line_no}, column '{target_name}'"
                )
            raw_targets.append(target_cell)
            for col, cell in zip(columns, cells):
                if cell in _MISSING_CELLS:
                    col.values.append(MISSING)
                elif col.kind == "numeric":
                    col.values.append(_parse_numeric(cell, line_no, col.name))
                else:
                    col.values.append(cell)
    if not raw_targets:
        raise DataError(f"'{path}' contains no data rows")
    return columns, raw_targets, task


def impute_most_frequent(col: RawColumn) -> RawColumn:
    """Replace MISSING entries by the modal value.

    Mode ties are broken by the smallest value (numeric) or the
    lexicographically smallest value (categorical) so the result is
    deterministic.
    """
    present = [v for v in col.values if v is not MISSING]
    if not present:
        raise DataError(f"column '{col.name}' is entirely missing")
    counts: dict = {}
    for v in present:
        counts[v] = counts.get(v, 0) + 1
    top = max(counts.values())
    mode = min(v for v, c in counts.items() if c == top)
    values = [mode if v is MISSING else v for v in col.values]
    return RawColumn(col.name, col.kind, values)


def encode_categories(col: RawColumn) -> list[RawColumn]:
    """Encode an imputed categorical column numerically.

    At most 5 distinct categories: one 0/1 column per category, in first
    occurrence order. More than 5: a single column of integer codes assigned
    by first occurrence, starting at 0.
    """
    if col.kind != "categorical":
        raise DataError(f"column '{col.name}' is not categorical")
    if any(v is MISSING for v in col.values):
        raise DataError(f"column '{col.name}' must be imputed before encoding")
    categories = []
    for v in col.values:
        if v not in categories:
            categories.append(v)
    if len(categories) <= 5:
        return [
            RawColumn(
                f"{col.name}={cat}",
                "numeric",
                [1.0 if v == cat else 0.0 for v in col.values],
            )
            for cat in categories
        ]
    code = {cat: float(i) for i, cat in enumerate(categories)}
    return [RawColumn(col.name, "numeric", [code[v] for v in col.values])]


def assemble(columns: list[RawColumn], targets, task: str) -> Dataset:
    """Build a Dataset from numeric columns and raw targets.

    Classification targets are re-coded to contiguous 0..C-1 by the sorted
    original label value, which is stable across row subsets.
    """
    if task not in TASKS:
        raise DataError(f"unknown task '{task}'")
    if not columns:
        raise DataError("no feature columns")
    n = len(columns[0].values)
    for col in columns:
        if col.kind != "numeric":
            raise DataError(f"column '{col.name}' is not numeric")
        if len(col.values) != n:
            raise DataError(f"column '{col.name}' length mismatch")
    if len(targets) != n:
        raise DataError("target length mismatch")
    if n < 1:
        raise DataError("dataset is empty")

    features = np.empty((n, len(columns)), dtype=np.float64)
    for j, col in enumerate(columns):
        features[:, j] = col.values
    if not np.isfinite(features).all():
        i, j = (int(v) for v in np.argwhere(~np.isfinite(features))[0])
        raise DataError(
            f"non-finite value in column '{columns[j].name}' at row {i}"
        )
    feature_names = [c.name for c in columns]

    if task == REGRESSION:
        t = np.empty(n, dtype=np.float64)
        for i, v in enumerate(targets):
            try:
                t[i] = float(v)
            except (TypeError, ValueError):
                raise DataError(
                    f"unparseable regression target '{v}' at row {i}"
                ) from None
        if not np.isfinite(t).all():
            raise DataError("non-finite regression target")
        return Dataset(features, t, task, feature_names)

    # Classification: sort original labels (numerically when all parse as
    # numbers, else lexicographically) and map to contiguous codes.
    labels = [str(v) for v in targets]
    try:
        # Secondary string key keeps the order total when distinct spellings
        # share a numeric value ("1" vs "1.0").
        keyed = sorted(set(labels), key=lambda s: (float(s), s))
        display = [_display_label(v) for v in keyed]
    except ValueError:
        keyed = sorted(set(labels))
        display = list(keyed)
    if len(keyed) < 2:
        raise DataError("classification target has a single class")
    code = {lab: i for i, lab in enumerate(keyed)}
    t = np.asarray([code[lab] for lab in labels], dtype=np.int64)
    return Dataset(features, t, task, feature_names, len(keyed), display)


def _display_label(label: str):
    v = float(label)
    return int(v) if math.isfinite(v) and v == int(v) else v


def preprocess(columns: list[RawColumn], raw_targets, task: str) -> Dataset:
    """Impute, encode, and assemble raw columns into a Dataset."""
    numeric = []
    for col in columns:
        col = impute_most_frequent(col)
        if col.kind == "categorical":
            numeric.extend(encode_categories(col))
        else:
            numeric.append(col)
    return assemble(numeric, raw_targets, task)


def load_dataset(path, schema: dict) -> Dataset:
    """Read and preprocess a CSV file in one step."""
    columns, raw_targets, task = load_csv(path, schema)
    return preprocess(columns, raw_targets, task)
