"""One-parameter Gaussian data models.

Three families with a single scalar parameter:

* ``mean``        -- univariate Gaussian N(theta, 1)
* ``variance``    -- univariate zero-mean Gaussian N(0, theta)
* ``correlation`` -- bivariate zero-mean Gaussian with standardized
  marginals and covariance [[1, theta], [theta, 1]]

Each model exposes the log-density, the score (derivative of the
log-density in the parameter), its parameter-derivative, the Fisher
information and an exact seeded sampler.  Scores and informations are
hard-coded closed forms; finite differences are used only in tests.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, ParameterDomainError

_LOG_2PI = math.log(2.0 * math.pi)


class ModelKind(enum.Enum):
    GAUSSIAN_MEAN = "mean"
    GAUSSIAN_VARIANCE = "variance"
    GAUSSIAN_CORRELATION = "correlation"


@dataclass(frozen=True)
class ScalarModel:
    """Immutable one-parameter normalized density family.

    Parameters
    ----------
    kind : ModelKind
        Which of the three families.
    theta : float
        The scalar parameter.  Domain: mean in R, variance in (0, inf),
        correlation in (-1, 1).  Enforced at construction.
    """

    kind: ModelKind
    theta: float

    def __post_init__(self):
        th = float(self.theta)
        if not math.isfinite(th):
            raise ParameterDomainError(f"theta must be finite, got {th}")
        if self.kind is ModelKind.GAUSSIAN_VARIANCE and th <= 0.0:
            raise ParameterDomainError(f"variance must be positive, got {th}")
        if self.kind is ModelKind.GAUSSIAN_CORRELATION and abs(th) >= 1.0:
            raise ParameterDomainError(f"|correlation| must be < 1, got {th}")
        object.__setattr__(self, "theta", th)

    @property
    def dim(self) -> int:
        return 2 if self.kind is ModelKind.GAUSSIAN_CORRELATION else 1

    @property
    def std(self) -> float:
        """Marginal standard deviation, used for default box sizes."""
        if self.kind is ModelKind.GAUSSIAN_VARIANCE:
            return math.sqrt(self.theta)
        return 1.0

    @property
    def center(self) -> float:
        """Location of the density's mean along each axis."""
        return self.theta if self.kind is ModelKind.GAUSSIAN_MEAN else 0.0

    # -- closed forms -------------------------------------------------

    def log_density(self, x):
        """log p_theta(x).  For the correlation model ``x`` has a
        trailing axis of length 2."""
        x = np.asarray(x, dtype=float)
        th = self.theta
        if self.kind is ModelKind.GAUSSIAN_MEAN:
            return -0.5 * _LOG_2PI - 0.5 * (x - th) ** 2
        if self.kind is ModelKind.GAUSSIAN_VARIANCE:
            return -0.5 * (_LOG_2PI + math.log(th)) - x**2 / (2.0 * th)
        u, v = x[..., 0], x[..., 1]
        det = 1.0 - th * th
        quad = (u * u - 2.0 * th * u * v + v * v) / (2.0 * det)
        return -_LOG_2PI - 0.5 * math.log(det) - quad

    def density(self, x):
        return np.exp(self.log_density(x))

    def score(self, x):
        """g(x) = d/dtheta log p_theta(x) at this model's theta."""
        x = np.asarray(x, dtype=float)
        th = self.theta
        if self.kind is ModelKind.GAUSSIAN_MEAN:
            return x - th
        if self.kind is ModelKind.GAUSSIAN_VARIANCE:
            return (x**2 - th) / (2.0 * th * th)
        u, v = x[..., 0], x[..., 1]
        det = 1.0 - th * th
        num = th * det + (1.0 + th * th) * u * v - th * (u * u + v * v)
        return num / det**2

    def score_dtheta(self, x):
        """d/dtheta of the score, needed by the Newton estimator fit."""
        x = np.asarray(x, dtype=float)
        th = self.theta
        if self.kind is ModelKind.GAUSSIAN_MEAN:
            return -np.ones_like(x)
        if self.kind is ModelKind.GAUSSIAN_VARIANCE:
            return -(x**2) / th**3 + 1.0 / (2.0 * th * th)
        u, v = x[..., 0], x[..., 1]
        det = 1.0 - th * th
        n = th * det + (1.0 + th * th) * u * v - th * (u * u + v * v)
        dn = 1.0 - 3.0 * th * th + 2.0 * th * u * v - (u * u + v * v)
        return (dn * det + 4.0 * th * n) / det**3

    def fisher_information(self) -> float:
        """Analytic I_F = E[g^2]."""
        th = self.theta
        if self.kind is ModelKind.GAUSSIAN_MEAN:
            return 1.0
        if self.kind is ModelKind.GAUSSIAN_VARIANCE:
            return 1.0 / (2.0 * th * th)
        return (1.0 + th * th) / (1.0 - th * th) ** 2

    def with_theta(self, theta: float) -> "ScalarModel":
        return ScalarModel(self.kind, theta)

    # -- sampling -----------------------------------------------------

    def sample(self, n: int, seed: int) -> np.ndarray:
        """n i.i.d. exact draws, deterministic for a fixed seed.

        Returns shape (n,) for the univariate models and (n, 2) for the
        correlation model (via the Cholesky factor of the covariance).
        """
        if n < 1:
            raise ConstructionError(f"n must be >= 1, got {n}")
        rng = np.random.default_rng(seed)
        th = self.theta
        if self.kind is ModelKind.GAUSSIAN_MEAN:
            return rng.standard_normal(n) + th
        if self.kind is ModelKind.GAUSSIAN_VARIANCE:
            return rng.standard_normal(n) * math.sqrt(th)
        z = rng.standard_normal((n, 2))
        # Cholesky factor of [[1, th], [th, 1]]
        l21 = th
        l22 = math.sqrt(1.0 - th * th)
        out = np.empty_like(z)
        out[:, 0] = z[:, 0]
        out[:, 1] = l21 * z[:, 0] + l22 * z[:, 1]
        return out


def parse_model(spec: str) -> ScalarModel:
    """Parse a CLI model spec string ``mean:<t>|variance:<t>|correlation:<t>``."""
    try:
        name, _, value = spec.partition(":")
        kind = ModelKind(name.strip())
        theta = float(value)
    except (ValueError, KeyError) as exc:
        raise ConstructionError(f"invalid model spec {spec!r}") from exc
    return ScalarModel(kind, theta)


def format_model(model: ScalarModel) -> str:
    return f"{model.kind.value}:{model.theta:g}"
