"""Scalar search helpers: golden-section refinement and local-extremum
detection on dense grids."""

from __future__ import annotations

import math

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_minimize(f, a: float, b: float, tol: float = 1e-6):
    """Minimize f on [a, b] by golden-section search.

    Returns (x_min, f(x_min)).  Deterministic; ~log(tol/(b-a))/log(phi)
    evaluations.
    """
    if b < a:
        a, b = b, a
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def golden_section_maximize(f, a: float, b: float, tol: float = 1e-6):
    x, val = golden_section_minimize(lambda t: -f(t), a, b, tol)
    return x, -val


def interior_local_minima(axis: np.ndarray, values: np.ndarray) -> list[int]:
    """Indices of strict interior local minima of a sampled function."""
    idx = []
    for k in range(1, len(values) - 1):
        if values[k] < values[k - 1] and values[k] < values[k + 1]:
            idx.append(k)
    return idx


def interior_local_maxima(axis: np.ndarray, values: np.ndarray) -> list[int]:
    return interior_local_minima(axis, -np.asarray(values))
