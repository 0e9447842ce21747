"""Small input-validation helpers shared by the estimators and simulators."""

import numpy as np


class ConfigurationError(ValueError):
    """Raised when a scenario or experiment configuration is invalid."""


def check_array_2d(x, name="X", dtype=float):
    """Coerce to a 2-D float array, rejecting NaN/inf."""
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_vector(x, name="y"):
    arr = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_positive(value, name):
    if not np.isfinite(value) or value <= 0:
        raise ConfigurationError(f"{name} must be strictly positive, got {value!r}")
    return float(value)
