"""Deterministic composite-trapezoid quadrature on uniform grids.

1-D grids are uniform node sets with trapezoid weights; 2-D grids are
tensor products.  The nodes double as the evaluation lattice for
tabulated and histogram densities, which keeps the discretized MSE an
exactly differentiable function of histogram weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionError, NumericError

DEFAULT_RANGE_STDS = 8.0
DEFAULT_N_1D = 2001
DEFAULT_N_2D = 201


@dataclass(frozen=True)
class Grid:
    """Quadrature grid with nodes and positive weights.

    ``nodes`` has shape (N,) in 1-D or (N, 2) in 2-D (row-major tensor
    product).  ``axis`` holds the per-axis node positions.
    """

    dim: int
    lo: float
    hi: float
    n_per_axis: int
    axis: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.n_per_axis - 1)

    def integrate_values(self, values: np.ndarray) -> float:
        """Sum_k weights_k * values_k with a fixed summation order."""
        values = np.asarray(values, dtype=float)
        if values.shape != self.weights.shape:
            raise ConstructionError(
                f"values shape {values.shape} != weights shape {self.weights.shape}"
            )
        bad = ~np.isfinite(values)
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise NumericError(
                f"non-finite integrand value {values.flat[k]} at node {self.nodes[k]}"
            )
        return float(np.dot(self.weights, values))

    def integrate(self, f) -> float:
        return self.integrate_values(np.asarray(f(self.nodes), dtype=float))


def build_grid(dim: int, lo: float, hi: float, n_per_axis: int) -> Grid:
    """Composite trapezoid grid; 2-D grids are tensor products."""
    if dim not in (1, 2):
        raise ConstructionError(f"dim must be 1 or 2, got {dim}")
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ConstructionError(f"invalid bounds [{lo}, {hi}]")
    if n_per_axis < 3 or n_per_axis % 2 == 0:
        raise ConstructionError(
            f"n_per_axis must be odd and >= 3, got {n_per_axis}"
        )
    axis = np.linspace(lo, hi, n_per_axis)
    h = (hi - lo) / (n_per_axis - 1)
    w1 = np.full(n_per_axis, h)
    w1[0] = w1[-1] = 0.5 * h
    if dim == 1:
        nodes = axis
        weights = w1
    else:
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        nodes = np.column_stack([xx.ravel(), yy.ravel()])
        weights = np.outer(w1, w1).ravel()
    return Grid(
        dim=dim,
        lo=float(lo),
        hi=float(hi),
        n_per_axis=int(n_per_axis),
        axis=axis,
        nodes=nodes,
        weights=weights,
    )


def default_grid_for(model, n_per_axis: int | None = None, range_stds: float = DEFAULT_RANGE_STDS) -> Grid:
    """Default grid covering the model's mean +/- ``range_stds`` stds."""
    if n_per_axis is None:
        n_per_axis = DEFAULT_N_1D if model.dim == 1 else DEFAULT_N_2D
    half = range_stds * model.std
    return build_grid(model.dim, model.center - half, model.center + half, n_per_axis)
