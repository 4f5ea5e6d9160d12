"""Numerical optimization of the asymptotic MSE/KL over noise choices.

Three optimizers:

* :func:`sweep_parametric_noise` -- dense 1-D grid evaluation of the
  objective over a same-family noise parameter, with golden-section
  refinement of every interior local minimum;
* :func:`optimize_histogram` -- Polak-Ribiere nonlinear conjugate
  gradient with a strong-Wolfe line search over histogram bin logits,
  using the exact gradient of the quadrature-discretized objective;
* :func:`optimize_proportion` -- sweep of the noise proportion
  pi = nu/(1+nu) under a fixed total budget.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import line_search as _wolfe_line_search

from .asymptotics import MomentWorkspace, asymptotic_covariance
from .densities import HistogramDensity, ParametricNoise
from .errors import ConstructionError, DegeneracyError, NumericError
from .models import ScalarModel
from .quadrature import Grid, default_grid_for
from .search import golden_section_minimize, interior_local_minima

WOLFE_C1 = 1e-4
WOLFE_C2 = 0.1
DEFAULT_MAX_ITER = 200
DEFAULT_GTOL = 1e-7
DEFAULT_PROPORTION_POINTS = 197
AXIS_TOL = 1e-6


@dataclass(frozen=True)
class SweepResult:
    """A 1-D objective sweep with refined minima.

    ``local_minima`` lists (location, value) for every strict interior
    local minimum after golden-section refinement; ``argmin``/
    ``min_value`` is the best of them (or of the grid when none is
    interior).
    """

    axis: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    argmin: float
    min_value: float
    local_minima: tuple = ()


@dataclass(frozen=True)
class OptimizerTrace:
    iterations: int
    objective_history: tuple
    gradient_norm_history: tuple
    converged: bool


def _map(fn, items, threads: int = 1):
    """Ordered map, optionally on a thread pool.  Result order (and so
    every downstream reduction) is independent of the thread count."""
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _objective_value(ws: MomentWorkspace, pn_values, nu: float, T: int, objective: str) -> float:
    mp = ws.moments_from_values(pn_values, nu)
    mse = (nu + 1.0) / T * asymptotic_covariance(mp)
    if objective == "kl":
        return mse * ws.model.fisher_information() / 2.0
    if objective != "mse":
        raise ConstructionError(f"objective must be 'mse' or 'kl', got {objective!r}")
    return mse


def _refined_minima(axis, values, evaluate) -> SweepResult:
    """Refine every finite strict interior local minimum of a sweep."""
    finite = np.isfinite(values)
    minima = []
    for k in interior_local_minima(axis, np.where(finite, values, np.inf)):
        if not (finite[k - 1] and finite[k] and finite[k + 1]):
            continue
        x, v = golden_section_minimize(evaluate, axis[k - 1], axis[k + 1], tol=AXIS_TOL)
        minima.append((float(x), float(v)))
    if minima:
        best = min(minima, key=lambda t: t[1])
    else:
        k = int(np.nanargmin(np.where(finite, values, np.nan)))
        best = (float(axis[k]), float(values[k]))
    return SweepResult(
        axis=np.asarray(axis, float),
        values=np.asarray(values, float),
        argmin=best[0],
        min_value=best[1],
        local_minima=tuple(minima),
    )


def sweep_parametric_noise(
    model: ScalarModel,
    nu: float,
    T: int,
    param_grid,
    objective: str = "mse",
    grid: Grid | None = None,
    threads: int = 1,
) -> SweepResult:
    """Objective over a same-family noise parameter.

    Degenerate points (noise with no overlap) are recorded as NaN and
    skipped by the minima search instead of aborting the sweep.
    """
    if grid is None:
        grid = default_grid_for(model)
    ws = MomentWorkspace(model, grid)
    nodes = grid.nodes

    def evaluate(param: float) -> float:
        try:
            pn = model.with_theta(param).density(nodes)
            return _objective_value(ws, pn, nu, T, objective)
        except (DegeneracyError, NumericError):
            return float("nan")

    param_grid = np.asarray(param_grid, dtype=float)
    values = np.asarray(_map(evaluate, param_grid, threads))
    return _refined_minima(param_grid, values, evaluate)


def _histogram_objective_setup(ws: MomentWorkspace, hist: HistogramDensity):
    """Map quadrature nodes to histogram bins once per optimization."""
    idx = hist.bin_index(ws.grid.nodes)
    valid = idx >= 0
    return np.where(valid, idx, 0), valid


def _histogram_objective_and_grad(
    ws: MomentWorkspace,
    hist: HistogramDensity,
    logits: np.ndarray,
    nu: float,
    T: int,
    objective: str,
    bin_of_node: np.ndarray,
    node_valid: np.ndarray,
):
    """Objective and its exact gradient w.r.t. the bin logits.

    The discretized objective is a smooth closed-form composition
    softmax -> bin densities -> weighted moments -> variance, so the
    chain rule gives the gradient exactly.
    """
    h = hist.with_logits(logits)
    k = h.n_bins
    from .densities import softmax

    s = softmax(logits)
    scale = 1.0 + k * h.floor
    masses = (s + h.floor) / scale
    areas = h.bin_areas
    rho = masses / areas
    pn = np.where(node_valid, rho[bin_of_node], 0.0)

    mp = ws.moments_from_values(pn, nu)
    m, i2 = mp.mean, mp.second_moment
    c = (nu + 1.0) / nu
    sigma = 1.0 / i2 - c * m * m / (i2 * i2)
    if sigma <= 0.0:
        raise NumericError(f"non-positive asymptotic variance {sigma}")
    pref = (nu + 1.0) / T
    if objective == "kl":
        pref *= ws.model.fisher_information() / 2.0
    obj = pref * sigma

    dobj_dm = pref * (-2.0 * c * m / (i2 * i2))
    dobj_di = pref * (-1.0 / (i2 * i2) + 2.0 * c * m * m / i2**3)
    dm_dpn, di_dpn = ws.moment_partials(pn, nu)
    node_grad = dobj_dm * dm_dpn + dobj_di * di_dpn
    grad_rho = np.bincount(
        bin_of_node[node_valid], weights=node_grad[node_valid], minlength=k
    )
    grad_s = grad_rho / areas / scale
    grad_logits = s * (grad_s - float(np.dot(s, grad_s)))
    return obj, grad_logits


def mse_gradient_logits(
    model: ScalarModel,
    hist: HistogramDensity,
    nu: float,
    T: int,
    grid: Grid | None = None,
    objective: str = "mse",
) -> np.ndarray:
    """Exact gradient of the discretized objective w.r.t. bin logits."""
    if grid is None:
        grid = default_grid_for(model)
    ws = MomentWorkspace(model, grid)
    bin_of_node, node_valid = _histogram_objective_setup(ws, hist)
    _, grad = _histogram_objective_and_grad(
        ws, hist, hist.logits, nu, T, objective, bin_of_node, node_valid
    )
    return grad


def optimize_histogram(
    model: ScalarModel,
    nu: float,
    T: int,
    edges,
    init_logits,
    objective: str = "mse",
    max_iter: int = DEFAULT_MAX_ITER,
    gtol: float = DEFAULT_GTOL,
    grid: Grid | None = None,
    floor: float | None = None,
):
    """Polak-Ribiere nonlinear CG over histogram logits.

    Strong-Wolfe line search (c1=1e-4, c2=0.1); the direction restarts
    to steepest descent whenever the PR coefficient turns negative or
    the line search fails.  Converged when the gradient infinity-norm
    drops to ``gtol``.  Returns (HistogramDensity, OptimizerTrace) with
    the best accepted iterate even on failure.
    """
    if max_iter < 0:
        raise ConstructionError(f"max_iter must be >= 0, got {max_iter}")
    if grid is None:
        grid = default_grid_for(model)
    kwargs = {} if floor is None else {"floor": floor}
    hist = HistogramDensity(
        np.asarray(edges, float), np.asarray(init_logits, float), dim=model.dim, **kwargs
    )
    ws = MomentWorkspace(model, grid)
    bin_of_node, node_valid = _histogram_objective_setup(ws, hist)

    def f_and_g(x):
        return _histogram_objective_and_grad(
            ws, hist, x, nu, T, objective, bin_of_node, node_valid
        )

    x = np.asarray(init_logits, dtype=float).copy()
    fx, gx = f_and_g(x)
    obj_hist = [fx]
    gnorm_hist = [float(np.abs(gx).max())]
    direction = -gx
    converged = gnorm_hist[-1] <= gtol
    iterations = 0

    for iterations in range(1, max_iter + 1):
        if converged:
            iterations -= 1
            break
        alpha = _strong_wolfe_step(f_and_g, x, fx, gx, direction)
        if alpha is None and not np.array_equal(direction, -gx):
            # restart from steepest descent before giving up
            direction = -gx
            alpha = _strong_wolfe_step(f_and_g, x, fx, gx, direction)
        if alpha is None:
            break
        x_new = x + alpha * direction
        fx_new, gx_new = f_and_g(x_new)
        if fx_new > fx:
            break
        beta = float(np.dot(gx_new, gx_new - gx) / np.dot(gx, gx))
        if beta < 0.0 or not np.isfinite(beta):
            beta = 0.0
        direction = -gx_new + beta * direction
        if np.dot(direction, gx_new) >= 0.0:
            direction = -gx_new
        x, fx, gx = x_new, fx_new, gx_new
        obj_hist.append(fx)
        gnorm_hist.append(float(np.abs(gx).max()))
        converged = gnorm_hist[-1] <= gtol
    trace = OptimizerTrace(
        iterations=iterations,
        objective_history=tuple(obj_hist),
        gradient_norm_history=tuple(gnorm_hist),
        converged=bool(converged),
    )
    return hist.with_logits(x), trace


def _strong_wolfe_step(f_and_g, x, fx, gx, direction):
    """One strong-Wolfe line search; returns the step or None."""

    def f(z):
        return f_and_g(z)[0]

    def g(z):
        return f_and_g(z)[1]

    with np.errstate(all="ignore"):
        alpha = _wolfe_line_search(
            f, g, x, direction, gfk=gx, old_fval=fx, c1=WOLFE_C1, c2=WOLFE_C2,
            maxiter=60,
        )[0]
    if alpha is None or not np.isfinite(alpha) or alpha <= 0.0:
        return None
    return float(alpha)


def optimize_proportion(
    model: ScalarModel,
    noise,
    T: int,
    objective: str = "mse",
    grid: Grid | None = None,
    n_points: int = DEFAULT_PROPORTION_POINTS,
    threads: int = 1,
) -> SweepResult:
    """Objective over the noise proportion pi in [0.01, 0.99] under a
    fixed total budget; the best grid point is refined by golden
    section.  The noise density is fixed, so its grid values are
    computed once for the whole sweep."""
    if grid is None:
        grid = default_grid_for(model)
    ws = MomentWorkspace(model, grid)
    pn = np.asarray(noise.density(grid.nodes), dtype=float)

    def evaluate(pi: float) -> float:
        nu = pi / (1.0 - pi)
        try:
            return _objective_value(ws, pn, nu, T, objective)
        except (DegeneracyError, NumericError):
            return float("nan")

    axis = np.linspace(0.01, 0.99, n_points)
    values = np.asarray(_map(evaluate, axis, threads))
    return _refined_minima(axis, values, evaluate)


def same_family_optimal_noise(
    model: ScalarModel,
    nu: float,
    T: int,
    objective: str = "mse",
    grid: Grid | None = None,
    n_points: int = 241,
) -> tuple[ParametricNoise, SweepResult]:
    """Best same-family noise at the given ratio, using the default
    parameter ranges per family."""
    sweep = sweep_parametric_noise(
        model, nu, T, default_param_grid(model, n_points), objective, grid
    )
    return ParametricNoise(model.with_theta(sweep.argmin)), sweep


def default_param_grid(model: ScalarModel, n_points: int = 241) -> np.ndarray:
    """Default sweep ranges: mean theta +/- 5, variance on a log grid
    theta/20 .. 20*theta, correlation -0.95 .. 0.95."""
    from .models import ModelKind

    if model.kind is ModelKind.GAUSSIAN_MEAN:
        return np.linspace(model.theta - 5.0, model.theta + 5.0, n_points)
    if model.kind is ModelKind.GAUSSIAN_VARIANCE:
        return model.theta * np.logspace(np.log10(1 / 20), np.log10(20.0), n_points)
    return np.linspace(-0.95, 0.95, n_points)
