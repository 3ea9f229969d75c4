"""Input validation helpers shared by the functional API and the estimators."""

import numbers

import numpy as np


class ValidationError(ValueError):
    """Raised when numerical input violates a documented precondition."""


def check_signal(y, name="y"):
    """Return ``y`` as a finite, non-empty 1-D float64 array."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ValidationError(f"{name} must be 1-D, got shape {y.shape}")
    if y.size < 1:
        raise ValidationError(f"{name} is empty")
    if not np.all(np.isfinite(y)):
        raise ValidationError(f"{name} contains NaN or Inf")
    return y


def check_multichannel(Y, name="Y"):
    """Return ``Y`` as a finite (n_channels, n_times) float64 array.

    A 1-D input is promoted to a single channel.
    """
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[np.newaxis, :]
    if Y.ndim != 2:
        raise ValidationError(f"{name} must be 2-D (n_channels, n_times), got shape {Y.shape}")
    if Y.shape[0] < 1 or Y.shape[1] < 1:
        raise ValidationError(f"{name} has an empty dimension: {Y.shape}")
    if not np.all(np.isfinite(Y)):
        raise ValidationError(f"{name} contains NaN or Inf")
    return Y


def check_probability(p, name="p"):
    if not isinstance(p, numbers.Real) or not (0.0 < float(p) < 1.0):
        raise ValidationError(f"{name} must lie in the open interval (0, 1), got {p!r}")
    return float(p)


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ValidationError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_fraction(l, n_channels):
    """Validate the active-channel fraction and return ``floor(l * C)``."""
    if not isinstance(l, numbers.Real) or not (0.0 < float(l) <= 1.0):
        raise ValidationError(f"l must lie in (0, 1], got {l!r}")
    k = int(np.floor(float(l) * n_channels + 1e-9))
    if k < 1:
        raise ValidationError(f"floor(l * C) = 0 for l={l}, C={n_channels}")
    return k
