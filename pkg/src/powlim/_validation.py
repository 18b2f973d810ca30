"""Shared input-validation helpers for estimator and surrogate front doors."""

from __future__ import annotations

import numpy as np


def as_parameter_batch(mu, r: int) -> tuple[np.ndarray, bool]:
    """Coerce mu to a float batch of shape (q, r).

    Accepts one parameter vector of shape (r,) or a stack of them of shape
    (q, r). Returns the batch and whether the input was a single vector.
    Raises ValueError on wrong dimension or non-finite entries.
    """
    arr = np.asarray(mu, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != r:
        raise ValueError(f"expected parameter vectors of dimension {r}, got shape {np.shape(mu)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("parameter values must be finite")
    return arr, single


def as_vector(x, n: int, name: str = "vector") -> np.ndarray:
    """Coerce x to a finite float vector of length n."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise ValueError(f"expected {name} of length {n}, got shape {np.shape(x)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr
