"""Split-scan backend selection.

Two interchangeable kernel sets exist: numba-compiled scans and pure-numpy
vectorized fallbacks. The active one is chosen by the ``CONDTREE_BACKEND``
environment variable ("numba" or "numpy"; default numba when importable) and
can be switched at runtime with :func:`set_backend`, which the tests and the
benchmark use to compare both in one process. Both produce bitwise identical
results.
"""

import os

from . import _scan_numpy

_BACKENDS = ("numba", "numpy")
_active = None


def _load(name):
    if name == "numpy":
        return _scan_numpy
    if name == "numba":
        from . import _scan_numba

        return _scan_numba
    raise ValueError(f"unknown backend '{name}' (choose from {_BACKENDS})")


def set_backend(name: str) -> None:
    """Select the active kernel set by name ("numba" or "numpy")."""
    global _active
    _active = _load(name)


def active_backend() -> str:
    """Name of the kernel set currently in use."""
    return _active.BACKEND_NAME


def kernels():
    """The active kernel module (scan_gini / scan_entropy / scan_variance)."""
    return _active


def _init_from_env() -> None:
    global _active
    requested = os.environ.get("CONDTREE_BACKEND", "").strip().lower()
    if requested:
        _active = _load(requested)
        return
    try:
        _active = _load("numba")
    except ImportError:
        _active = _scan_numpy


_init_from_env()
