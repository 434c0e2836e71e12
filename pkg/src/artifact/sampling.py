"""Seeded, pole-guarded sample generation."""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import PoleProximityError, SamplingExhaustedError


def rng_from(seed) -> np.random.Generator:
    """PCG64 generator; bit-stable across platforms for a given integer seed."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def cell_points(rng: np.random.Generator, shape, tau: complex, im_frac: float = 0.35) -> np.ndarray:
    """Points ``x + y tau`` with ``x`` uniform in ``[-1/2, 1/2)`` and ``|y| <= im_frac``."""
    x = rng.uniform(-0.5, 0.5, size=shape)
    y = rng.uniform(-im_frac, im_frac, size=shape)
    return x + y * complex(tau)


def guarded(rng: np.random.Generator, make: Callable, check: Callable, count: int,
            max_tries: int | None = None) -> list:
    """Draw ``count`` samples ``make(rng)`` accepted by ``check``.

    ``check`` returns False or raises :class:`PoleProximityError` to reject.

    Raises
    ------
    SamplingExhaustedError
        If ``max_tries`` (default ``20 * count + 50``) draws do not suffice.
    """
    max_tries = 20 * count + 50 if max_tries is None else max_tries
    out = []
    for _ in range(max_tries):
        s = make(rng)
        try:
            ok = check(s)
        except PoleProximityError:
            ok = False
        if ok:
            out.append(s)
            if len(out) == count:
                return out
    raise SamplingExhaustedError(f"only {len(out)} of {count} samples passed the pole guard")
