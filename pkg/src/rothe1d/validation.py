"""Input validation helpers shared by the estimators and the CLI."""

import numbers

import numpy as np


def check_positive(name, value, strict=True):
    """Validate a positive (or non-negative) real scalar and return it as float."""
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")
    value = float(value)
    if strict and value <= 0.0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
    if not strict and value < 0.0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")
    return value


def check_finite(name, value):
    """Validate a finite real scalar and return it as float."""
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")
    return float(value)


def check_count(name, value, minimum=1):
    """Validate an integer >= minimum and return it as int."""
    if not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_complex_vector(name, values, n=None):
    """Coerce to a finite 1-D complex array, optionally of fixed length."""
    arr = np.asarray(values, dtype=complex)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} must have length {n}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr
