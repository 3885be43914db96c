"""Shared fixtures: backend restoration and a one-time kernel warm-up."""

import numpy as np
import pytest

from condtree import backend
from condtree.data import CLASSIFICATION, Dataset
from condtree.tree import Hyperparams, fit


@pytest.fixture
def backend_guard():
    """Restore the active split-scan backend after a test that switches it."""
    original = backend.active_backend()
    yield
    backend.set_backend(original)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger one tiny fit so JIT compilation never lands inside a timed test."""
    data = Dataset(
        features=np.asarray([[0.0], [1.0], [2.0], [3.0]]),
        targets=np.asarray([0, 0, 1, 1], dtype=np.int64),
        task=CLASSIFICATION,
        feature_names=["x0"],
        n_classes=2,
        class_labels=["0", "1"],
    )
    fit(data, Hyperparams(impurity="gini"))
    fit(data, Hyperparams(impurity="entropy"))
