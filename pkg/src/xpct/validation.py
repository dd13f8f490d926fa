"""Input validation helpers used by the functional core and the estimators."""

import numpy as np

from .errors import InvalidArgumentError, InvalidDataError


def as_image(a, name="image"):
    """Coerce to a 2-D float64 array, rejecting anything else."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise InvalidArgumentError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def as_image_stack(a, name="stack"):
    """Coerce to a (n_frames, n_u, n_v) float64 array.

    A single 2-D frame is promoted to a stack of one.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 2:
        a = a[np.newaxis]
    if a.ndim != 3:
        raise InvalidArgumentError(f"{name} must be 2-D or 3-D, got shape {a.shape}")
    return a


def check_finite(a, name="array"):
    if not np.all(np.isfinite(a)):
        raise InvalidDataError(f"{name} contains non-finite values")
    return a


def check_nonnegative(a, name="array"):
    if np.any(np.asarray(a) < 0):
        raise InvalidArgumentError(f"{name} must be non-negative everywhere")
    return a


def check_positive_scalar(x, name):
    if not x > 0:
        raise InvalidArgumentError(f"{name} must be > 0, got {x!r}")
    return x


def check_same_shape(a, b, name_a="a", name_b="b"):
    if np.shape(a) != np.shape(b):
        raise InvalidArgumentError(
            f"{name_a} and {name_b} must have equal shapes, "
            f"got {np.shape(a)} vs {np.shape(b)}"
        )
