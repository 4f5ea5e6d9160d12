"""Closed-form optimal noise densities.

Two regimes with analytic optima:

* all-noise limit (and the perturbative regime, which shares the same
  optimum): the MSE-optimal noise is proportional to the data density
  times the score magnitude scaled by an inverse-Fisher power; for a
  scalar parameter the MSE and KL optima coincide at
  ``p_n(x) proportional to p_d(x) * |g(x)|``.

* all-data limit: the optimal noise concentrates on the maximizers of
  ``p_d(xi) * w(xi)`` with ``w = g^2`` for the MSE objective and
  ``w = |g|`` for the KL objective.  The runtime representation is a
  temperature-controlled soft-arg-max density on the quadrature grid,
  never a true Dirac, with a small regularizer keeping the weight
  positive at zero-score points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .densities import TabulatedDensity
from .errors import NumericError
from .models import ScalarModel
from .quadrature import Grid
from .search import golden_section_maximize, interior_local_maxima

DEFAULT_EPS1_SCALE = 0.01
DEFAULT_EPS2 = 1e-6


@dataclass(frozen=True)
class TheoreticalNoise:
    """A closed-form optimal noise tabulated on a grid."""

    objective: str  # "mse" | "kl"
    regime: str  # "all-noise" | "all-data"
    density: TabulatedDensity
    eps1: float = 0.0
    eps2: float = 0.0
    dirac_candidates: tuple = ()

    @property
    def dim(self) -> int:
        return self.density.dim

    def sample(self, n, seed):
        return self.density.sample(n, seed)


def _check_objective(objective: str) -> str:
    if objective not in ("mse", "kl"):
        raise NumericError(f"objective must be 'mse' or 'kl', got {objective!r}")
    return objective


def _concentration_weight(model: ScalarModel, objective: str, x, eps2: float = 0.0):
    """w(x) for the all-data objective p_d * w: g^2 for MSE, |g| for KL,
    regularized away from zero by eps2."""
    g2 = model.score(x) ** 2 + eps2
    return g2 if objective == "mse" else np.sqrt(g2)


def optimal_noise_all_noise(model: ScalarModel, objective: str, grid: Grid) -> TheoreticalNoise:
    """All-noise (and perturbation) regime optimum, tabulated on ``grid``.

    For a scalar parameter both objectives give a density proportional
    to p_d(x)*|g(x)| since the Fisher information is a positive constant.
    """
    _check_objective(objective)
    values = model.density(grid.nodes) * np.abs(model.score(grid.nodes))
    density = TabulatedDensity(grid, values)
    return TheoreticalNoise(objective=objective, regime="all-noise", density=density)


def optimal_noise_all_data(
    model: ScalarModel,
    objective: str,
    grid: Grid,
    eps1: float | None = None,
    eps2: float = DEFAULT_EPS2,
) -> TheoreticalNoise:
    """All-data regime optimum as a soft-arg-max relaxation.

    ``density(x) proportional to exp(p_d(x) * w(x) / eps1)``; eps1
    defaults to ``0.01 * max`` of the concentration objective, eps2
    keeps the weight positive where the score vanishes.
    """
    _check_objective(objective)
    if eps2 <= 0.0:
        raise NumericError(f"eps2 must be positive, got {eps2}")
    obj = model.density(grid.nodes) * _concentration_weight(model, objective, grid.nodes, eps2)
    peak = float(obj.max())
    if eps1 is None:
        eps1 = DEFAULT_EPS1_SCALE * peak
    if eps1 <= 0.0:
        raise NumericError(f"eps1 must be positive, got {eps1}")
    expo = (obj - peak) / eps1
    values = np.exp(np.maximum(expo, -745.0))
    values[expo < -745.0] = 0.0
    if np.count_nonzero(values) < 2:
        raise NumericError(
            f"soft-arg-max underflowed at eps1={eps1:g}; use a larger eps1"
        )
    density = TabulatedDensity(grid, values)
    cands = tuple(dirac_candidates(model, objective, grid))
    return TheoreticalNoise(
        objective=objective,
        regime="all-data",
        density=density,
        eps1=float(eps1),
        eps2=float(eps2),
        dirac_candidates=cands,
    )


def dirac_candidates(model: ScalarModel, objective: str, grid: Grid | None = None) -> list:
    """Locations where the all-data optimal noise concentrates its mass.

    Strict interior local maxima of p_d(xi)*w(xi) are refined by
    golden-section to absolute tolerance 1e-8 in 1-D, then only the
    global maximizers (ties within relative 1e-9) are kept: the
    concentration set is the arg-max, and e.g. the variance model has a
    genuine but strictly lower local maximum at the origin.  In 2-D the
    4-neighbor grid maxima are returned unrefined.
    """
    from .quadrature import default_grid_for

    _check_objective(objective)
    if grid is None:
        grid = default_grid_for(model)

    def obj_scalar(x):
        if model.dim == 2:
            x = np.asarray(x)
        return float(model.density(x) * _concentration_weight(model, objective, x))

    if model.dim == 1:
        values = model.density(grid.nodes) * _concentration_weight(model, objective, grid.nodes)
        refined = []
        for k in interior_local_maxima(grid.axis, values):
            a, b = grid.axis[k - 1], grid.axis[k + 1]
            x, v = golden_section_maximize(obj_scalar, a, b, tol=1e-8)
            refined.append((float(x), float(v)))
        if not refined:
            return [float(grid.axis[int(np.argmax(values))])]
        top = max(v for _, v in refined)
        return sorted(x for x, v in refined if v >= top * (1.0 - 1e-9))

    n = grid.n_per_axis
    values = (
        model.density(grid.nodes) * _concentration_weight(model, objective, grid.nodes)
    ).reshape(n, n)
    out = []
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            v = values[i, j]
            if (
                v > values[i - 1, j] and v > values[i + 1, j]
                and v > values[i, j - 1] and v > values[i, j + 1]
            ):
                out.append((float(grid.axis[i]), float(grid.axis[j])))
    return out


# -- regularized trace weight for multi-dimensional parameters ----------
#
# Not deployed at runtime (the models here have a scalar parameter); the
# exact Sherman-Morrison form and its Taylor series are kept as tested
# reference formulas for the d > 1 case.


def regularized_trace_weight(g_norm_sq: float, eps: float, dim: int) -> float:
    """Exact w_eps = 1 / tr((g g^T + eps*Id)^{-1}) in parameter dim ``dim``.

    By Sherman-Morrison, tr((g g^T + eps I)^{-1}) =
    dim/eps - |g|^2 / (eps * (eps + |g|^2)).
    """
    if eps <= 0.0:
        raise NumericError(f"eps must be positive, got {eps}")
    trace = dim / eps - g_norm_sq / (eps * (eps + g_norm_sq))
    return 1.0 / trace


def regularized_trace_weight_series(g_norm_sq: float, eps: float, dim: int) -> float:
    """Third-order Taylor expansion of ``regularized_trace_weight`` in eps
    for dim > 1:

    w_eps = eps/(d-1) - eps^2/(|g|^2 (d-1)^2) + eps^3 (2-d)/(|g|^4 (d-1)^3).
    """
    if dim < 2:
        raise NumericError("the series form applies to parameter dim > 1")
    d = float(dim)
    return (
        eps / (d - 1.0)
        - eps**2 / (g_norm_sq * (d - 1.0) ** 2)
        + eps**3 * (2.0 - d) / (g_norm_sq**2 * (d - 1.0) ** 3)
    )
