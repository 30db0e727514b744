"""Construction helpers for the dense Vector / Matrix values used everywhere.

Vectors and matrices are plain float64 numpy arrays.  These helpers only
enforce the construction invariants (dimensionality, finiteness).
"""

from __future__ import annotations

from typing import Iterable, Union

import numpy as np

ArrayLike = Union[np.ndarray, Iterable[float], float]


def as_vector(values: ArrayLike, name: str = "vector") -> np.ndarray:
    """Return *values* as a finite 1-D float64 array."""
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_matrix(values: ArrayLike, name: str = "matrix") -> np.ndarray:
    """Return *values* as a finite 2-D float64 array (row-major)."""
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def rowdot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Inner products along the last axis, keeping it (shape ``(..., 1)``)."""
    return np.sum(a * b, axis=-1, keepdims=True)
