"""Input checks shared by the estimator facade and the command line."""
from __future__ import annotations

import math

import numpy as np
from sklearn.utils import check_array


def check_elevations(X, upper: float = 180.0) -> np.ndarray:
    """Coerce a column (or 1-D array) of elevations in degrees and range-check it."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    arr = check_array(arr, dtype=float)
    if arr.shape[1] != 1:
        raise ValueError(f"expected a single elevation column, got {arr.shape[1]} columns")
    col = arr[:, 0]
    if np.any((col < 0) | (col > upper)):
        raise ValueError(f"elevations must lie in [0, {upper:g}] degrees")
    return col


def check_positive(value, name: str) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return value


def check_ratio(value, name: str = "axis ratio") -> float:
    value = float(value)
    if not 0 < value <= 1:
        raise ValueError(f"{name} must lie in (0, 1], got {value!r}")
    return value
