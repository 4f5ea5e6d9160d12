"""Asymptotic efficiency of the noise-contrastive estimator.

Core quantities for a scalar parameter: the optimal-discriminator
weight, the discriminator-weighted score mean and second moment, the
asymptotic variance and MSE under a fixed total sample budget
T = T_d + T_n, the expected KL error, the Cramer-Rao baseline, and the
closed-form efficiency gaps in the all-noise limit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from . import _kernels
from .errors import DegeneracyError, NumericError
from .models import ScalarModel, format_model
from .quadrature import Grid

DEGENERACY_THRESHOLD = 1e-12


@dataclass(frozen=True)
class WeightedScoreMoments:
    """Discriminator-weighted score moments at noise-data ratio nu.

    ``mean`` is the weighted score mean, ``second_moment`` the weighted
    mean of the squared score.  With noise equal to data these reduce to
    0 and nu/(1+nu) times the Fisher information.
    """

    mean: float
    second_moment: float
    nu: float

    def __post_init__(self):
        if not self.nu > 0.0:
            raise NumericError(f"nu must be positive, got {self.nu}")
        if self.second_moment <= DEGENERACY_THRESHOLD:
            raise DegeneracyError(
                "weighted second moment "
                f"{self.second_moment:.3e} <= {DEGENERACY_THRESHOLD:.0e}; "
                "the noise has no overlap with the informative region"
            )


@dataclass(frozen=True)
class EfficiencyReport:
    """MSE/KL of a configuration plus its Cramer-Rao baseline."""

    model: str
    theta: float
    noise: str
    nu: float
    T: int
    mse: float
    kl: float
    cramer_rao: float
    sigma: float

    def __post_init__(self):
        vals = (self.mse, self.kl, self.cramer_rao, self.sigma)
        if not all(np.isfinite(v) and v > 0.0 for v in vals):
            raise NumericError(f"non-finite or non-positive report entries: {vals}")
        if self.mse < self.cramer_rao - 1e-9:
            raise NumericError(
                f"mse {self.mse} below the Cramer-Rao baseline {self.cramer_rao}"
            )

    def to_json(self) -> str:
        d = asdict(self)
        del d["sigma"]
        d["sigma"] = self.sigma
        return json.dumps(d, indent=2)

    CSV_HEADER = "model,theta,noise,nu,T,mse,kl,cramer_rao"

    def to_csv_row(self) -> str:
        return (
            f"{self.model},{self.theta!r},{self.noise},{self.nu!r},{self.T},"
            f"{self.mse!r},{self.kl!r},{self.cramer_rao!r}"
        )


def discriminator_weight(x, model: ScalarModel, noise, nu: float):
    """1 - D(x) = nu*p_n(x) / (p_d(x) + nu*p_n(x)), in [0, 1].

    Equals 1 where only the noise has mass and 0 where both densities
    vanish (the weighted integrands are then 0 anyway).
    """
    if not nu > 0.0:
        raise NumericError(f"nu must be positive, got {nu}")
    pd = model.density(x)
    pn = np.asarray(noise.density(x), dtype=float)
    denom = pd + nu * pn
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(denom > 0.0, nu * pn / np.where(denom > 0.0, denom, 1.0), 0.0)
    return out


class MomentWorkspace:
    """Precomputed grid arrays for repeated moment evaluations.

    Sweeps and the conjugate-gradient optimizer call the moment kernel
    thousands of times with the same (model, grid); the score, data
    density and quadrature weights only need computing once.
    """

    def __init__(self, model: ScalarModel, grid: Grid):
        if grid.dim != model.dim:
            raise NumericError(f"grid dim {grid.dim} != model dim {model.dim}")
        self.model = model
        self.grid = grid
        self.score = np.ascontiguousarray(model.score(grid.nodes))
        self.data_density = np.ascontiguousarray(model.density(grid.nodes))
        self.weights = np.ascontiguousarray(grid.weights)

    def moments_from_values(self, noise_values: np.ndarray, nu: float) -> WeightedScoreMoments:
        pn = np.ascontiguousarray(noise_values, dtype=float)
        m, i2 = _kernels.weighted_moments(
            self.score, self.data_density, pn, self.weights, nu
        )
        return WeightedScoreMoments(mean=m, second_moment=i2, nu=float(nu))

    def moments(self, noise, nu: float) -> WeightedScoreMoments:
        return self.moments_from_values(np.asarray(noise.density(self.grid.nodes), float), nu)

    def moment_partials(self, noise_values: np.ndarray, nu: float):
        """Per-node d(mean)/d(pn) and d(second_moment)/d(pn)."""
        pn = np.ascontiguousarray(noise_values, dtype=float)
        return _kernels.moment_partials(
            self.score, self.data_density, pn, self.weights, nu
        )


def generalized_moments(model: ScalarModel, noise, nu: float, grid: Grid) -> WeightedScoreMoments:
    """Quadrature evaluation of the weighted score mean and second moment."""
    return MomentWorkspace(model, grid).moments(noise, nu)


def asymptotic_covariance(mp: WeightedScoreMoments) -> float:
    """Scalar asymptotic variance: 1/I - ((nu+1)/nu) * m^2 / I^2."""
    i2 = mp.second_moment
    sigma = 1.0 / i2 - (mp.nu + 1.0) / mp.nu * mp.mean**2 / i2**2
    if sigma <= 0.0:
        raise NumericError(
            f"non-positive asymptotic variance {sigma}; quadrature breakdown"
        )
    return sigma


def asymptotic_mse(T: int, mp: WeightedScoreMoments) -> float:
    """MSE under the total budget T: (nu+1)/T times the variance."""
    if T < 1:
        raise NumericError(f"T must be >= 1, got {T}")
    return (mp.nu + 1.0) / T * asymptotic_covariance(mp)


def asymptotic_kl(T: int, mp: WeightedScoreMoments, fisher: float) -> float:
    """Expected KL error: variance * fisher * (1+nu) / (2T).

    For a scalar parameter this equals asymptotic_mse * fisher / 2.
    """
    if not fisher > 0.0:
        raise NumericError(f"fisher must be positive, got {fisher}")
    return asymptotic_mse(T, mp) * fisher / 2.0


def cramer_rao_mse(T_d: int, fisher: float) -> float:
    """Best attainable MSE with T_d data samples: 1 / (T_d * fisher)."""
    if T_d < 1:
        raise NumericError(f"T_d must be >= 1, got {T_d}")
    if not fisher > 0.0:
        raise NumericError(f"fisher must be positive, got {fisher}")
    return 1.0 / (T_d * fisher)


@dataclass(frozen=True)
class AllNoiseGaps:
    """Closed-form efficiency gaps in the all-noise limit.

    With s(x) = |g(x)|/I_F:

    * ``data_minus_cramer_rao``    = E_{p_d}[s^2] / T  (noise = data)
    * ``optimal_minus_cramer_rao`` = (E_{p_d}[s])^2 / T (optimal noise)
    * ``data_minus_optimal``       = Var_{p_d}(s) / T >= 0
    """

    data_minus_cramer_rao: float
    optimal_minus_cramer_rao: float
    data_minus_optimal: float


def mse_gaps_all_noise(model: ScalarModel, grid: Grid, T: int) -> AllNoiseGaps:
    """Gaps between the all-noise-limit MSE and the Cramer-Rao bound,
    for noise equal to the data vs. the closed-form optimal noise."""
    if T < 1:
        raise NumericError(f"T must be >= 1, got {T}")
    fisher = model.fisher_information()
    s = np.abs(model.score(grid.nodes)) / fisher
    pd = model.density(grid.nodes)
    e1 = grid.integrate_values(s * pd)
    e2 = grid.integrate_values(s * s * pd)
    return AllNoiseGaps(
        data_minus_cramer_rao=e2 / T,
        optimal_minus_cramer_rao=e1**2 / T,
        data_minus_optimal=(e2 - e1**2) / T,
    )


def efficiency_report(
    model: ScalarModel, noise, noise_label: str, nu: float, T: int, grid: Grid
) -> EfficiencyReport:
    """Evaluate one configuration into a serializable report."""
    mp = generalized_moments(model, noise, nu, grid)
    fisher = model.fisher_information()
    t_d = T / (1.0 + nu)
    return EfficiencyReport(
        model=format_model(model),
        theta=model.theta,
        noise=noise_label,
        nu=float(nu),
        T=int(T),
        mse=asymptotic_mse(T, mp),
        kl=asymptotic_kl(T, mp, fisher),
        cramer_rao=1.0 / (t_d * fisher),
        sigma=asymptotic_covariance(mp),
    )
