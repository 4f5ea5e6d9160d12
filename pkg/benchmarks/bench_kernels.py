"""Benchmark the compiled moment kernels against the NumPy fallback.

Times ``weighted_moments`` and ``moment_partials`` on the default 1-D
and 2-D quadrature grids and prints the per-call time of each backend
plus the speedup.  Run as a script:

    python benchmarks/bench_kernels.py [repeats]
"""

from __future__ import annotations

import sys
import timeit

import numpy as np

from ncenoise._kernels import _fallback
from ncenoise.models import ModelKind, ScalarModel
from ncenoise.quadrature import default_grid_for

try:
    from ncenoise._kernels import _core
except ImportError:
    _core = None


def _arrays(model: ScalarModel):
    grid = default_grid_for(model)
    g = np.ascontiguousarray(model.score(grid.nodes))
    pd = np.ascontiguousarray(model.density(grid.nodes))
    pn = np.ascontiguousarray(model.density(grid.nodes))
    w = np.ascontiguousarray(grid.weights)
    return g, pd, pn, w


def _time(fn, args, repeats: int) -> float:
    return min(timeit.repeat(lambda: fn(*args), number=repeats, repeat=5)) / repeats


def main(repeats: int = 200) -> None:
    cases = [
        ("mean (1-D, 2001 nodes)", ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)),
        ("correlation (2-D, 201^2 nodes)", ScalarModel(ModelKind.GAUSSIAN_CORRELATION, 0.3)),
    ]
    kernels = ["weighted_moments", "moment_partials"]
    if _core is None:
        print("compiled extension not available; timing the NumPy fallback only")
    header = f"{'case':34s} {'kernel':18s} {'numpy':>10s} {'cython':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for label, model in cases:
        args = _arrays(model) + (1.0,)
        for name in kernels:
            t_np = _time(getattr(_fallback, name), args, repeats)
            if _core is not None:
                t_cy = _time(getattr(_core, name), args, repeats)
                ratio = t_np / t_cy
                print(f"{label:34s} {name:18s} {t_np*1e6:8.1f}us {t_cy*1e6:8.1f}us {ratio:7.2f}x")
            else:
                print(f"{label:34s} {name:18s} {t_np*1e6:8.1f}us {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 200)
