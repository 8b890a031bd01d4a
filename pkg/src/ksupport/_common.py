"""Shared validation helpers and exception types."""

from __future__ import annotations

import numbers

import numpy as np


class InconsistencyError(RuntimeError):
    """A search that must succeed mathematically found no solution.

    Raised when floating-point corruption (or invalid input slipping past
    validation) breaks an invariant such as the existence of the split index
    in the k-support norm formula.
    """


class DivergenceError(ArithmeticError):
    """The solver produced a non-finite objective value."""

    def __init__(self, iteration, message=None):
        self.iteration = iteration
        super().__init__(message or f"non-finite objective at iteration {iteration}")


def as_vector(w, name="w"):
    """Return `w` as a finite 1-D float64 array (a copy is made only if needed)."""
    arr = np.asarray(w, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must have at least one entry")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def check_k(k, d):
    """Validate an integer sparsity level against dimension `d`."""
    if isinstance(k, bool) or not isinstance(k, numbers.Integral):
        if isinstance(k, numbers.Real) and float(k).is_integer():
            k = int(k)
        else:
            raise TypeError(f"k must be an integer, got {k!r}")
    k = int(k)
    if not 1 <= k <= d:
        raise ValueError(f"k out of range: need 1 <= k <= {d}, got {k}")
    return k


def check_real_k(k, d):
    """Validate a real-valued k in [1, d] (elastic-net norms only)."""
    k = float(k)
    if not np.isfinite(k) or not 1.0 <= k <= d:
        raise ValueError(f"k out of range: need 1 <= k <= {d}, got {k}")
    return k
