"""Input validation helpers for the estimator-facing API."""

import numpy as np


def as_float_matrix(name: str, value) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2d array, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_frontier_pair(X, Y):
    """Validate a paired (inputs, outputs) frontier: C>=2 rows, all entries > 0."""
    X = as_float_matrix("inputs", X)
    Y = as_float_matrix("outputs", Y)
    if X.shape[0] != Y.shape[0]:
        raise ValueError(f"inputs have {X.shape[0]} rows but outputs have {Y.shape[0]}")
    if X.shape[0] < 2:
        raise ValueError("a frontier needs at least 2 units; scores degenerate otherwise")
    if np.any(X <= 0) or np.any(Y <= 0):
        raise ValueError("inputs and outputs must be strictly positive")
    return X, Y


def as_float_vector(name: str, value) -> np.ndarray:
    arr = np.asarray(value, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_unit_labels(units, n: int) -> tuple:
    if units is None:
        return tuple(f"dmu{i}" for i in range(n))
    units = tuple(str(u) for u in units)
    if len(units) != n:
        raise ValueError(f"{len(units)} unit labels for {n} rows")
    return units
