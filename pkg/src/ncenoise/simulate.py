"""Finite-sample noise-contrastive estimation and replicated validation.

Fits the scalar parameter by maximizing the discriminator
log-likelihood over data and noise samples (1-D Newton with a bisection
safeguard), then replicates the fit to compare the empirical MSE and KL
error against the asymptotic predictions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import asymptotic_kl, asymptotic_mse, generalized_moments
from .errors import ConstructionError, NumericError
from .models import ModelKind, ScalarModel
from .quadrature import Grid, default_grid_for

NEWTON_GTOL = 1e-10
NEWTON_MAX_ITER = 200
EXP_CLIP = 700.0
MAX_FAILURE_FRACTION = 0.05


@dataclass(frozen=True)
class NceRun:
    """One finite-sample fit."""

    t_d: int
    t_n: int
    seed: int
    theta_hat: float
    objective_value: float
    converged: bool


@dataclass(frozen=True)
class EmpiricalReport:
    """Replicated empirical errors with their asymptotic predictions."""

    replicates: int
    failures: int
    mean_sq_error: float
    std_error: float
    mean_kl: float
    kl_std_error: float
    predicted_mse: float
    predicted_kl: float

    CSV_HEADER = (
        "model,theta,noise,nu,T,replicates,mse,mse_se,kl,kl_se,"
        "predicted_mse,predicted_kl"
    )


def gaussian_kl(kind: ModelKind, theta_true: float, theta_hat: float) -> float:
    """Closed-form KL(p_theta_true || p_theta_hat) for each family."""
    if kind is ModelKind.GAUSSIAN_MEAN:
        return 0.5 * (theta_hat - theta_true) ** 2
    if kind is ModelKind.GAUSSIAN_VARIANCE:
        r = theta_true / theta_hat
        return 0.5 * (r - 1.0 - math.log(r))
    r1, r2 = theta_true, theta_hat
    return (
        (1.0 - r1 * r2) / (1.0 - r2 * r2)
        - 1.0
        + 0.5 * math.log((1.0 - r2 * r2) / (1.0 - r1 * r1))
    )


def _domain_bounds(kind: ModelKind, data: np.ndarray):
    if kind is ModelKind.GAUSSIAN_MEAN:
        lo = float(np.min(data)) - 10.0
        hi = float(np.max(data)) + 10.0
        return lo, hi
    if kind is ModelKind.GAUSSIAN_VARIANCE:
        return 1e-6, 1e6
    return -1.0 + 1e-9, 1.0 - 1e-9


def nce_fit(
    data: np.ndarray,
    noise_points: np.ndarray,
    kind: ModelKind,
    init_theta: float,
    noise,
    seed: int = 0,
) -> NceRun:
    """Maximize the discriminator log-likelihood over the scalar theta.

    The objective is sum_data log(sigma(h)) + sum_noise log(1-sigma(h))
    with h(x) = log p_theta(x) - log(nu * p_n(x)) and nu taken from the
    sample-set sizes.  Newton iterations are safeguarded by bisection on
    the score equation inside the parameter domain; the log-ratio h is
    clipped at +/-700 so points where the noise density vanishes
    contribute their limit terms.
    """
    data = np.asarray(data, dtype=float)
    noise_points = np.asarray(noise_points, dtype=float)
    t_d = data.shape[0]
    t_n = noise_points.shape[0]
    if t_d < 1 or t_n < 1:
        raise ConstructionError("both sample sets must be nonempty")
    nu = t_n / t_d

    with np.errstate(divide="ignore"):
        log_ref_d = np.log(nu * np.asarray(noise.density(data), float))
        log_ref_n = np.log(nu * np.asarray(noise.density(noise_points), float))

    def parts(theta: float):
        mdl = ScalarModel(kind, theta)
        h_d = np.clip(mdl.log_density(data) - log_ref_d, -EXP_CLIP, EXP_CLIP)
        h_n = np.clip(mdl.log_density(noise_points) - log_ref_n, -EXP_CLIP, EXP_CLIP)
        sd = 1.0 / (1.0 + np.exp(-h_d))
        sn = 1.0 / (1.0 + np.exp(-h_n))
        gd = mdl.score(data)
        gn = mdl.score(noise_points)
        grad = float(np.dot(1.0 - sd, gd) - np.dot(sn, gn))
        hess = float(
            np.dot(1.0 - sd, mdl.score_dtheta(data))
            - np.dot(sd * (1.0 - sd), gd * gd)
            - np.dot(sn, mdl.score_dtheta(noise_points))
            - np.dot(sn * (1.0 - sn), gn * gn)
        )
        obj = float(np.sum(np.log(np.maximum(sd, 1e-300)))
                    + np.sum(np.log(np.maximum(1.0 - sn, 1e-300))))
        return obj, grad, hess

    lo, hi = _domain_bounds(kind, data)
    theta = min(max(float(init_theta), lo), hi)
    converged = False
    obj = grad = float("nan")
    # bracket on the score sign if possible, for the bisection safeguard
    b_lo, b_hi = lo, hi
    for _ in range(NEWTON_MAX_ITER):
        obj, grad, hess = parts(theta)
        if abs(grad) <= NEWTON_GTOL:
            converged = True
            break
        if grad > 0.0:
            b_lo = max(b_lo, theta)
        else:
            b_hi = min(b_hi, theta)
        if hess < 0.0:
            step = theta - grad / hess
        else:
            step = float("nan")
        if not (b_lo < step < b_hi) or not np.isfinite(step):
            step = 0.5 * (b_lo + b_hi)
        if step == theta:
            converged = abs(grad) <= 1e-8
            break
        theta = step
    return NceRun(
        t_d=t_d,
        t_n=t_n,
        seed=int(seed),
        theta_hat=float(theta),
        objective_value=obj,
        converged=bool(converged),
    )


def _replicate_fits(
    model: ScalarModel, noise, nu: float, T: int, replicates: int, seed: int
):
    if replicates < 2:
        raise ConstructionError(f"replicates must be >= 2, got {replicates}")
    t_d = int(round(T / (1.0 + nu)))
    t_n = int(T - t_d)
    if t_d < 1 or t_n < 1:
        raise ConstructionError(f"budget T={T} at nu={nu} leaves an empty sample set")
    children = np.random.SeedSequence(seed).spawn(replicates)
    runs = []
    for r, child in enumerate(children):
        data_seed, noise_seed = (int(s) for s in child.generate_state(2))
        data = model.sample(t_d, data_seed)
        noise_points = noise.sample(t_n, noise_seed)
        runs.append(nce_fit(data, noise_points, model.kind, model.theta, noise, seed=r))
    return runs


def _empirical_report(
    model: ScalarModel,
    noise,
    nu: float,
    T: int,
    replicates: int,
    seed: int,
    grid: Grid | None = None,
) -> EmpiricalReport:
    runs = _replicate_fits(model, noise, nu, T, replicates, seed)
    ok = [r for r in runs if r.converged]
    failures = len(runs) - len(ok)
    if failures > MAX_FAILURE_FRACTION * replicates:
        raise NumericError(
            f"{failures}/{replicates} replicates failed to converge"
        )
    theta_hat = np.array([r.theta_hat for r in ok])
    sq = (theta_hat - model.theta) ** 2
    kl = np.array([gaussian_kl(model.kind, model.theta, th) for th in theta_hat])
    n = len(ok)
    if grid is None:
        grid = default_grid_for(model)
    mp = generalized_moments(model, noise, nu, grid)
    fisher = model.fisher_information()
    return EmpiricalReport(
        replicates=n,
        failures=failures,
        mean_sq_error=float(np.mean(sq)),
        std_error=float(np.std(sq, ddof=1) / math.sqrt(n)),
        mean_kl=float(np.mean(kl)),
        kl_std_error=float(np.std(kl, ddof=1) / math.sqrt(n)),
        predicted_mse=asymptotic_mse(T, mp),
        predicted_kl=asymptotic_kl(T, mp, fisher),
    )


def empirical_mse(model, noise, nu, T, replicates, seed, grid=None) -> EmpiricalReport:
    """Replicated empirical squared error against the asymptotic MSE."""
    return _empirical_report(model, noise, nu, T, replicates, seed, grid)


def empirical_kl(model, noise, nu, T, replicates, seed, grid=None) -> EmpiricalReport:
    """Replicated empirical KL error against the asymptotic prediction."""
    return _empirical_report(model, noise, nu, T, replicates, seed, grid)
