"""Small numerical helpers shared by the residual checks."""
from __future__ import annotations

import numpy as np

from .errors import PoleProximityError

#: Minimum modulus accepted for any theta-type denominator.
POLE_GUARD = 1e-4


def rel_residual(lhs, rhs):
    """``|lhs - rhs| / max(1, |lhs|, |rhs|)``, elementwise.

    Absolute for quantities of order one or smaller, relative for large
    ones; quasi-periodic functions grow exponentially off the real axis so
    a purely absolute measure would be meaningless there.
    """
    lhs, rhs = np.asarray(lhs), np.asarray(rhs)
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return np.abs(lhs - rhs) / scale


def guard(value, where: str, tol: float = POLE_GUARD):
    """Return ``value`` or raise :class:`PoleProximityError` if it is near 0."""
    v = np.asarray(value)
    if np.any(np.abs(v) < tol):
        bad = v.flat[int(np.argmin(np.abs(v)))]
        raise PoleProximityError(where, complex(bad))
    return value
