"""Pure-NumPy implementations of the moment kernels.

Same contracts as the compiled versions in ``_core.pyx``; selected at
import time when the extension is unavailable or when
``NCENOISE_PURE_PYTHON=1`` is set.
"""

import numpy as np


def weighted_moments(g, pd, pn, w, nu):
    denom = pd + nu * pn
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(denom > 0.0, nu * pn / np.where(denom > 0.0, denom, 1.0), 0.0)
    base = w * r * pd
    gb = g * base
    return float(np.sum(gb)), float(np.sum(g * gb))


def moment_partials(g, pd, pn, w, nu):
    denom = pd + nu * pn
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(denom > 0.0, w * pd * nu * pd / np.where(denom > 0.0, denom, 1.0) ** 2, 0.0)
    dm = g * c
    return dm, g * dm
