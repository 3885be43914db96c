"""Bundled dataset fixtures: registry, locations, and loading.

The package ships schema sidecars for a small set of public benchmark
datasets but, to avoid redistributing third-party data, not the CSV files
themselves. Drop the files into the package's ``data/`` directory (see
``data/README.md`` for sources and expected layouts) and the loaders pick
them up; until then, loading raises a DataError that names the missing file.
"""

from __future__ import annotations

import json
from importlib import resources

from .data import Dataset, load_dataset
from .errors import DataError

#: name -> (csv filename, schema filename)
FIXTURES = {
    "haberman": ("haberman.csv", "haberman.schema.json"),
    "appendicitis": ("appendicitis.csv", "appendicitis.schema.json"),
    "o-ring": ("o-ring.csv", "o-ring.schema.json"),
    "plastic": ("plastic.csv", "plastic.schema.json"),
}


def fixture_dir():
    return resources.files("condtree") / "data"


def load_schema(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise DataError(f"schema file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid schema JSON in {path}: {exc}") from None


def fixture_paths(name: str):
    """(csv path, schema path) for a registered fixture name."""
    if name not in FIXTURES:
        known = ", ".join(sorted(FIXTURES))
        raise DataError(f"unknown fixture '{name}' (known: {known})")
    csv_name, schema_name = FIXTURES[name]
    base = fixture_dir()
    return base / csv_name, base / schema_name


def load_fixture(name: str) -> Dataset:
    """Load a bundled fixture by name."""
    csv_path, schema_path = fixture_paths(name)
    if not csv_path.is_file():
        raise DataError(
            f"fixture file missing: {csv_path} — this package does not ship "
            f"third-party data; see {fixture_dir() / 'README.md'} for how to "
            f"obtain it"
        )
    schema = load_schema(schema_path)
    return load_dataset(str(csv_path), schema)
