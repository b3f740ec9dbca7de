"""Backend dispatch for the hot group-statistic kernels.

The numba backend is the default when numba imports cleanly; set
``TRADEOPT_BACKEND=numpy`` to force the pure-numpy path (or ``numba`` to
insist on it). `use_backend` switches at runtime, which the tests and the
kernel benchmark use to compare both paths in one process.
"""

from __future__ import annotations

import os
import warnings
from contextlib import contextmanager

from . import _numpy

try:
    from . import _numba
except ImportError:  # pragma: no cover - depends on environment
    _numba = None

_BACKENDS = {"numpy": _numpy}
if _numba is not None:
    _BACKENDS["numba"] = _numba


def _initial_backend() -> str:
    requested = os.environ.get("TRADEOPT_BACKEND", "").strip().lower()
    if requested:
        if requested not in ("numba", "numpy"):
            raise ValueError(f"TRADEOPT_BACKEND must be 'numba' or 'numpy', got {requested!r}")
        if requested == "numba" and "numba" not in _BACKENDS:
            warnings.warn("numba requested but not importable; using numpy kernels")
            return "numpy"
        return requested
    return "numba" if "numba" in _BACKENDS else "numpy"


_active = _initial_backend()


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {sorted(_BACKENDS)})")
    global _active
    _active = name


@contextmanager
def use_backend(name: str):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def entropy_rows(codes, items, n_items, alpha):
    return _BACKENDS[_active].entropy_rows(codes, items, n_items, alpha)


def maxprob_rows(codes, users, n_users, alpha):
    return _BACKENDS[_active].maxprob_rows(codes, users, n_users, alpha)


def distinct_rows(codes, users, n_users):
    return _BACKENDS[_active].distinct_rows(codes, users, n_users)
