"""Noise-density representations.

Three interchangeable variants of the contrast distribution:

* :class:`ParametricNoise` -- a density from the same families as the
  data models;
* :class:`HistogramDensity` -- piecewise-constant density over a box,
  with one softmax-parameterized weight per bin (the optimizable
  representation);
* :class:`TabulatedDensity` -- values on a quadrature grid (used for
  the closed-form optimal noises).

All variants are normalized, non-negative, immutable after
construction, and exactly sampleable with an explicit seed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionError
from .models import ScalarModel
from .quadrature import Grid

DEFAULT_FLOOR = 1e-8
DEFAULT_BOX_STDS = 6.0
DEFAULT_BINS_1D = 64
DEFAULT_BINS_2D = 32


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=float)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


@dataclass(frozen=True)
class ParametricNoise:
    """Noise from the same one-parameter Gaussian families as the data."""

    model: ScalarModel

    @property
    def dim(self) -> int:
        return self.model.dim

    def density(self, x) -> np.ndarray:
        return self.model.density(x)

    def sample(self, n: int, seed: int) -> np.ndarray:
        return self.model.sample(n, seed)


@dataclass(frozen=True)
class HistogramDensity:
    """Piecewise-constant density on [edges[0], edges[-1]]^dim.

    The density value in bin k is
    ``(softmax(logits)_k + floor) / (area_k * (1 + K * floor))`` which
    integrates exactly to 1 and stays strictly positive on the box, so
    the weighted second moment downstream never degenerates.  In 2-D
    the same edge vector is used on both axes and ``logits`` is a flat
    K*K vector in row-major (x-major) order.
    """

    edges: np.ndarray = field(repr=False)
    logits: np.ndarray = field(repr=False)
    floor: float = DEFAULT_FLOOR
    dim: int = 1

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        logits = np.asarray(self.logits, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ConstructionError("edges must be strictly increasing, length >= 2")
        if self.dim not in (1, 2):
            raise ConstructionError(f"dim must be 1 or 2, got {self.dim}")
        k = edges.size - 1
        expected = k if self.dim == 1 else k * k
        if logits.shape != (expected,):
            raise ConstructionError(
                f"logits length {logits.size} inconsistent with {expected} bins"
            )
        if not self.floor > 0.0:
            raise ConstructionError("floor must be positive")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "logits", logits)

    @property
    def n_bins_per_axis(self) -> int:
        return self.edges.size - 1

    @property
    def n_bins(self) -> int:
        return self.logits.size

    @property
    def bin_areas(self) -> np.ndarray:
        widths = np.diff(self.edges)
        if self.dim == 1:
            return widths
        return np.outer(widths, widths).ravel()

    @property
    def masses(self) -> np.ndarray:
        """Per-bin probability masses, summing exactly to 1."""
        k = self.n_bins
        return (softmax(self.logits) + self.floor) / (1.0 + k * self.floor)

    @property
    def bin_values(self) -> np.ndarray:
        """Per-bin density values."""
        return self.masses / self.bin_areas

    def bin_index(self, x) -> np.ndarray:
        """Bin index of each point, -1 outside the box.  Points on the
        upper boundary belong to the last bin."""
        x = np.asarray(x, dtype=float)
        k = self.n_bins_per_axis
        if self.dim == 1:
            idx = np.searchsorted(self.edges, x, side="right") - 1
            idx = np.where(x == self.edges[-1], k - 1, idx)
            return np.where((idx >= 0) & (idx < k), idx, -1)
        ix = self.bin_index_axis(x[..., 0])
        iy = self.bin_index_axis(x[..., 1])
        return np.where((ix >= 0) & (iy >= 0), ix * k + iy, -1)

    def bin_index_axis(self, coord) -> np.ndarray:
        k = self.n_bins_per_axis
        idx = np.searchsorted(self.edges, coord, side="right") - 1
        idx = np.where(coord == self.edges[-1], k - 1, idx)
        return np.where((idx >= 0) & (idx < k), idx, -1)

    def density(self, x) -> np.ndarray:
        idx = self.bin_index(x)
        vals = self.bin_values
        out = np.where(idx >= 0, vals[np.clip(idx, 0, None)], 0.0)
        return out

    def with_logits(self, logits: np.ndarray) -> "HistogramDensity":
        return HistogramDensity(self.edges, logits, self.floor, self.dim)

    def sample(self, n: int, seed: int) -> np.ndarray:
        """Categorical bin draw, then uniform within the bin."""
        if n < 1:
            raise ConstructionError(f"n must be >= 1, got {n}")
        rng = np.random.default_rng(seed)
        bins = rng.choice(self.n_bins, size=n, p=self.masses)
        k = self.n_bins_per_axis
        lo, hi = self.edges[:-1], self.edges[1:]
        if self.dim == 1:
            return lo[bins] + rng.random(n) * (hi - lo)[bins]
        ix, iy = bins // k, bins % k
        u = rng.random((n, 2))
        out = np.empty((n, 2))
        out[:, 0] = lo[ix] + u[:, 0] * (hi - lo)[ix]
        out[:, 1] = lo[iy] + u[:, 1] * (hi - lo)[iy]
        return out

    # -- serialization (CSV contract) ----------------------------------

    def write_csv(self, path) -> None:
        vals = self.bin_values
        lo, hi = self.edges[:-1], self.edges[1:]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if self.dim == 1:
                w.writerow(["bin_lo", "bin_hi", "density"])
                for a, b, v in zip(lo, hi, vals):
                    w.writerow([repr(float(a)), repr(float(b)), repr(float(v))])
            else:
                w.writerow(["x_lo", "x_hi", "y_lo", "y_hi", "density"])
                k = self.n_bins_per_axis
                for flat, v in enumerate(vals):
                    i, j = flat // k, flat % k
                    w.writerow([
                        repr(float(lo[i])), repr(float(hi[i])),
                        repr(float(lo[j])), repr(float(hi[j])), repr(float(v)),
                    ])


def uniform_histogram(
    edges: np.ndarray, floor: float = DEFAULT_FLOOR, dim: int = 1
) -> HistogramDensity:
    edges = np.asarray(edges, dtype=float)
    k = edges.size - 1
    n = k if dim == 1 else k * k
    return HistogramDensity(edges, np.zeros(n), floor, dim)


def histogram_from_weights(
    edges, logits, floor: float = DEFAULT_FLOOR, dim: int = 1
) -> HistogramDensity:
    """Build a normalized histogram density from bin logits."""
    return HistogramDensity(np.asarray(edges, float), np.asarray(logits, float), floor, dim)


def default_edges_for(model, n_bins: int | None = None, box_stds: float = DEFAULT_BOX_STDS) -> np.ndarray:
    """Default histogram edges: model mean +/- ``box_stds`` stds."""
    if n_bins is None:
        n_bins = DEFAULT_BINS_1D if model.dim == 1 else DEFAULT_BINS_2D
    half = box_stds * model.std
    return np.linspace(model.center - half, model.center + half, n_bins + 1)


@dataclass(frozen=True)
class TabulatedDensity:
    """Density known by its values on a quadrature grid.

    ``values`` are normalized so that the grid quadrature of the density
    is 1.  Evaluation uses linear interpolation in 1-D and nearest-node
    lookup in 2-D (configurable via ``interpolation``); outside the grid
    range the density is 0.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)
    interpolation: str = "linear"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.weights.shape:
            raise ConstructionError("values must match the grid node count")
        if np.any(values < 0.0) or not np.all(np.isfinite(values)):
            raise ConstructionError("tabulated values must be finite and non-negative")
        total = float(np.dot(self.grid.weights, values))
        if total <= 0.0:
            raise ConstructionError("tabulated density has zero total mass")
        if self.grid.dim == 2 and self.interpolation == "linear":
            object.__setattr__(self, "interpolation", "nearest")
        if self.interpolation not in ("linear", "nearest"):
            raise ConstructionError(f"unknown interpolation {self.interpolation!r}")
        object.__setattr__(self, "values", values / total)

    @property
    def dim(self) -> int:
        return self.grid.dim

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = self.grid
        if g.dim == 1:
            if self.interpolation == "linear":
                out = np.interp(x, g.axis, self.values, left=0.0, right=0.0)
            else:
                idx = np.clip(np.round((x - g.lo) / g.step).astype(int), 0, g.n_per_axis - 1)
                out = self.values[idx]
            inside = (x >= g.lo) & (x <= g.hi)
            return np.where(inside, out, 0.0)
        n = g.n_per_axis
        ix = np.clip(np.round((x[..., 0] - g.lo) / g.step).astype(int), 0, n - 1)
        iy = np.clip(np.round((x[..., 1] - g.lo) / g.step).astype(int), 0, n - 1)
        inside = (
            (x[..., 0] >= g.lo) & (x[..., 0] <= g.hi)
            & (x[..., 1] >= g.lo) & (x[..., 1] <= g.hi)
        )
        return np.where(inside, self.values[ix * n + iy], 0.0)

    def sample(self, n: int, seed: int) -> np.ndarray:
        """Draw a node by its quadrature mass, then jitter uniformly
        within the node's cell."""
        if n < 1:
            raise ConstructionError(f"n must be >= 1, got {n}")
        rng = np.random.default_rng(seed)
        g = self.grid
        masses = g.weights * self.values
        masses = masses / masses.sum()
        idx = rng.choice(masses.size, size=n, p=masses)
        h = g.step
        if g.dim == 1:
            return g.axis[idx] + (rng.random(n) - 0.5) * h
        return g.nodes[idx] + (rng.random((n, 2)) - 0.5) * h

    def write_csv(self, path) -> None:
        """Emit node-centered cells in the histogram CSV format."""
        g = self.grid
        h = g.step
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if g.dim == 1:
                w.writerow(["bin_lo", "bin_hi", "density"])
                for x, v in zip(g.axis, self.values):
                    w.writerow([
                        repr(float(x - 0.5 * h)), repr(float(x + 0.5 * h)),
                        repr(float(v)),
                    ])
            else:
                w.writerow(["x_lo", "x_hi", "y_lo", "y_hi", "density"])
                for (x, y), v in zip(g.nodes, self.values):
                    w.writerow(
                        [repr(float(x - 0.5 * h)), repr(float(x + 0.5 * h)),
                         repr(float(y - 0.5 * h)), repr(float(y + 0.5 * h)),
                         repr(float(v))]
                    )
