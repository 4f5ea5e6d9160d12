"""End-to-end acceptance gate.

Each test prints one ``ACCEPTANCE <n> PASS/FAIL: <detail>`` line before
asserting, so a full run yields a complete checklist even on failure
(run pytest with ``-s`` or read the captured output of failing tests).
"""

import math
import time

import numpy as np
import pytest

from ncenoise.asymptotics import (
    asymptotic_mse,
    generalized_moments,
    mse_gaps_all_noise,
)
from ncenoise.densities import HistogramDensity, ParametricNoise, default_edges_for
from ncenoise.models import ModelKind, ScalarModel, parse_model
from ncenoise.optimize import (
    default_param_grid,
    mse_gradient_logits,
    optimize_histogram,
    optimize_proportion,
    sweep_parametric_noise,
)
from ncenoise.quadrature import default_grid_for
from ncenoise.simulate import empirical_kl, empirical_mse
from ncenoise.theory import dirac_candidates, optimal_noise_all_noise

SIX_MODELS = [
    parse_model(s)
    for s in ("mean:0", "mean:2", "variance:1", "variance:3", "correlation:0", "correlation:0.5")
]
FIGURE_MODELS = [parse_model(s) for s in ("mean:0", "variance:1", "correlation:0.3")]
NUS = [0.1, 0.5, 1.0, 3.0, 10.0]
T = 10000


def _report(n, ok, detail):
    print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def _binned_masses(density, grid, hist):
    """Project a tabulated density onto histogram bins and normalize."""
    node_mass = grid.weights * density.values
    idx = hist.bin_index(grid.nodes)
    inside = idx >= 0
    masses = np.bincount(idx[inside], weights=node_mass[inside], minlength=hist.n_bins)
    return masses / masses.sum()


def test_acceptance_01_closed_form_oracle():
    start = time.perf_counter()
    worst = 0.0
    for model in SIX_MODELS:
        grid = default_grid_for(model)
        noise = ParametricNoise(model)
        for nu in NUS:
            mse = asymptotic_mse(T, generalized_moments(model, noise, nu, grid))
            exact = (nu + 1.0) ** 2 / (nu * T * model.fisher_information())
            worst = max(worst, abs(mse / exact - 1.0))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and elapsed < 5.0
    _report(1, ok, f"max rel error {worst:.2e} (tol 1e-6), {elapsed:.2f}s (limit 5s)")


def test_acceptance_02_efficiency_ratio():
    start = time.perf_counter()
    worst = 0.0
    for model in SIX_MODELS:
        grid = default_grid_for(model)
        noise = ParametricNoise(model)
        fisher = model.fisher_information()
        for nu in NUS:
            mse = asymptotic_mse(T, generalized_moments(model, noise, nu, grid))
            t_d = T / (1.0 + nu)
            mle = 1.0 / (t_d * fisher)
            worst = max(worst, abs(mse / mle - (1.0 + 1.0 / nu)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and elapsed < 5.0
    _report(2, ok, f"max |ratio - (1+1/nu)| {worst:.2e} (tol 1e-6), {elapsed:.2f}s (limit 5s)")


def test_acceptance_03_optimal_proportion_is_half():
    start = time.perf_counter()
    argmins = []
    for model in FIGURE_MODELS:
        sweep = optimize_proportion(model, ParametricNoise(model), T)
        argmins.append(sweep.argmin)
    elapsed = time.perf_counter() - start
    worst = max(abs(a - 0.5) for a in argmins)
    ok = worst < 1e-4 and elapsed < 30.0
    _report(3, ok, f"argmins {[f'{a:.6f}' for a in argmins]}, max |pi*-0.5| {worst:.1e} "
                   f"(tol 1e-4), {elapsed:.1f}s (limit 30s)")


def test_acceptance_04_variance_scaling_384():
    start = time.perf_counter()
    ratios = []
    for theta in (0.5, 1.0, 2.0):
        model = ScalarModel(ModelKind.GAUSSIAN_VARIANCE, theta)
        sweep = sweep_parametric_noise(model, 1.0, T, default_param_grid(model))
        ratios.append(sweep.argmin / theta)
    elapsed = time.perf_counter() - start
    worst = max(abs(r - 3.84) for r in ratios)
    ok = worst <= 0.05 and elapsed < 60.0
    _report(4, ok, f"optimal variance / theta = {[f'{r:.4f}' for r in ratios]}, "
                   f"required 3.84 +/- 0.05, {elapsed:.1f}s (limit 60s)")


def test_acceptance_05_two_symmetric_mean_optima():
    start = time.perf_counter()
    model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
    sweep = sweep_parametric_noise(model, 1.0, T, default_param_grid(model))
    elapsed = time.perf_counter() - start
    n_min = len(sweep.local_minima)
    detail = f"{n_min} interior local minima"
    ok = n_min == 2
    if ok:
        (x1, v1), (x2, v2) = sorted(sweep.local_minima)
        sym = abs(x1 + x2)
        val = abs(v1 / v2 - 1.0)
        ok = sym < 1e-4 and val < 1e-6
        detail = (f"minima at {x1:.5f}, {x2:.5f}; asymmetry {sym:.1e} (tol 1e-4), "
                  f"value mismatch {val:.1e} (tol 1e-6)")
    ok = ok and elapsed < 60.0
    _report(5, ok, f"{detail}, {elapsed:.1f}s (limit 60s)")


def test_acceptance_06_correlation_fixed_point():
    start = time.perf_counter()
    grid0 = default_param_grid(parse_model("correlation:0"))
    step = float(grid0[1] - grid0[0])
    zero = sweep_parametric_noise(parse_model("correlation:0"), 1.0, T, grid0)
    small = sweep_parametric_noise(parse_model("correlation:0.05"), 1.0, T, grid0)
    elapsed = time.perf_counter() - start
    ok = abs(zero.argmin) <= step and small.argmin < 0.0 and elapsed < 300.0
    _report(6, ok, f"theta=0 optimum {zero.argmin:.5f} (|.| <= grid step {step:.4f}), "
                   f"theta=0.05 optimum {small.argmin:.5f} (< 0), {elapsed:.1f}s (limit 5min)")


def test_acceptance_07_dirac_candidates():
    start = time.perf_counter()
    mean = dirac_candidates(ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0), "mse")
    var = dirac_candidates(ScalarModel(ModelKind.GAUSSIAN_VARIANCE, 1.0), "mse")
    elapsed = time.perf_counter() - start
    e_mean = max(abs(abs(x) - math.sqrt(2.0)) for x in mean)
    e_var = max(abs(abs(x) - math.sqrt(5.0)) for x in var)
    ok = (len(mean) == 2 and len(var) == 2 and e_mean < 1e-6 and e_var < 1e-6
          and elapsed < 1.0)
    _report(7, ok, f"mean candidates off sqrt(2) by {e_mean:.1e}, variance off "
                   f"sqrt(5) by {e_var:.1e} (tol 1e-6), {elapsed:.2f}s (limit 1s)")


def test_acceptance_08_histogram_reaches_all_noise_optimum():
    start = time.perf_counter()
    model = ScalarModel(ModelKind.GAUSSIAN_VARIANCE, 1.0)
    grid = default_grid_for(model)
    edges = default_edges_for(model)
    hist, trace = optimize_histogram(
        model, 100.0, T, edges, np.zeros(edges.size - 1), grid=grid
    )
    theory = optimal_noise_all_noise(model, "mse", grid)
    target = _binned_masses(theory.density, grid, hist)
    tv = 0.5 * float(np.abs(hist.masses - target).sum())
    elapsed = time.perf_counter() - start
    ok = tv <= 0.05 and trace.iterations <= 200 and elapsed < 120.0
    _report(8, ok, f"TV distance {tv:.4f} (limit 0.05) in {trace.iterations} CG "
                   f"iterations (limit 200), {elapsed:.1f}s (limit 2min)")


def test_acceptance_09_all_data_concentration():
    start = time.perf_counter()
    model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
    grid = default_grid_for(model)
    edges = default_edges_for(model)
    hist, _ = optimize_histogram(
        model, 0.01, T, edges, np.zeros(edges.size - 1), grid=grid
    )
    targets = np.array([-math.sqrt(2.0), math.sqrt(2.0)])
    bins = hist.bin_index(targets)
    mass = float(hist.masses[bins].sum())
    elapsed = time.perf_counter() - start
    ok = mass >= 0.90 and elapsed < 120.0
    _report(9, ok, f"mass in bins containing -sqrt(2), +sqrt(2): {mass:.4f} "
                   f"(required >= 0.90), {elapsed:.1f}s (limit 2min)")


def test_acceptance_10_all_noise_dominance_and_gap():
    start = time.perf_counter()
    dominated = True
    worst_violation = 0.0
    for model in FIGURE_MODELS:
        grid = default_grid_for(model)
        theory = optimal_noise_all_noise(model, "mse", grid).density
        data_noise = ParametricNoise(model)
        for pi in np.linspace(0.02, 0.98, 49):
            nu = pi / (1.0 - pi)
            m_t = asymptotic_mse(T, generalized_moments(model, theory, nu, grid))
            m_d = asymptotic_mse(T, generalized_moments(model, data_noise, nu, grid))
            if m_t > m_d:
                dominated = False
                worst_violation = max(worst_violation, m_t - m_d)
    # gap difference at nu = 1e3: (MSE_data - MSE_optimal) vs Var(|g|/I_F)/T
    model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
    grid = default_grid_for(model)
    nu = 1e3
    theory = optimal_noise_all_noise(model, "mse", grid).density
    m_d = asymptotic_mse(T, generalized_moments(model, ParametricNoise(model), nu, grid))
    m_t = asymptotic_mse(T, generalized_moments(model, theory, nu, grid))
    gaps = mse_gaps_all_noise(model, grid, T)
    predicted = gaps.data_minus_optimal  # Var_{p_d}(|g|/I_F)/T by construction
    rel = abs((m_d - m_t) / predicted - 1.0)
    elapsed = time.perf_counter() - start
    ok = dominated and rel < 1e-3 and elapsed < 300.0
    _report(10, ok, f"dominance {'holds' if dominated else f'violated by {worst_violation:.2e}'}; "
                    f"gap difference rel error {rel:.2e} (tol 1e-3) at nu=1e3, "
                    f"{elapsed:.1f}s (limit 5min)")


def test_acceptance_11_gradient_check():
    start = time.perf_counter()
    rng = np.random.default_rng(42)
    worst = 0.0
    for model in FIGURE_MODELS:
        grid = default_grid_for(model, 101 if model.dim == 2 else 801)
        edges = default_edges_for(model, 8)
        n_bins = (edges.size - 1) ** model.dim
        for _ in range(5):
            logits = rng.normal(scale=0.5, size=n_bins)
            nu = float(10.0 ** rng.uniform(-1, 1))
            hist = HistogramDensity(edges, logits, dim=model.dim)
            grad = mse_gradient_logits(model, hist, nu, T, grid)

            from ncenoise.asymptotics import MomentWorkspace
            from ncenoise.optimize import (
                _histogram_objective_and_grad,
                _histogram_objective_setup,
            )

            ws = MomentWorkspace(model, grid)
            bin_of_node, node_valid = _histogram_objective_setup(ws, hist)

            def f(x):
                return _histogram_objective_and_grad(
                    ws, hist, x, nu, T, "mse", bin_of_node, node_valid
                )[0]

            h = 1e-6
            for j in range(n_bins):
                e = np.zeros(n_bins)
                e[j] = h
                fd = (f(logits + e) - f(logits - e)) / (2.0 * h)
                scale = max(abs(fd), 1e-9)
                worst = max(worst, abs(grad[j] - fd) / scale)
    elapsed = time.perf_counter() - start
    ok = worst < 1e-4 and elapsed < 30.0
    _report(11, ok, f"max componentwise rel error {worst:.2e} (tol 1e-4) over "
                    f"5 random configs per model, {elapsed:.1f}s (limit 30s)")


def test_acceptance_12_monte_carlo_validation():
    start = time.perf_counter()
    model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
    noise = ParametricNoise(model)
    rep_mse = empirical_mse(model, noise, 1.0, 10000, replicates=2000, seed=20260823)
    z_mse = (rep_mse.mean_sq_error - 4.0 / 10000) / rep_mse.std_error
    rep_kl = empirical_kl(model, noise, 1.0, 10000, replicates=2000, seed=20260823)
    z_kl = (rep_kl.mean_kl - rep_kl.predicted_kl) / rep_kl.kl_std_error
    elapsed = time.perf_counter() - start
    ok = abs(z_mse) < 4.0 and abs(z_kl) < 4.0 and elapsed < 300.0
    _report(12, ok, f"MSE z-score {z_mse:.2f}, KL z-score {z_kl:.2f} (|z| < 4), "
                    f"{elapsed:.1f}s (limit 5min)")


def test_acceptance_13_property_based_figure_curves():
    start = time.perf_counter()
    # variance model: optimum / theta constant across theta to 1%
    ratios = []
    for theta in (0.5, 1.0, 2.0):
        model = ScalarModel(ModelKind.GAUSSIAN_VARIANCE, theta)
        sweep = sweep_parametric_noise(model, 1.0, T, default_param_grid(model))
        ratios.append(sweep.argmin / theta)
    spread = (max(ratios) - min(ratios)) / np.mean(ratios)
    # correlation model: the optimum changes sign with theta
    neg = sweep_parametric_noise(
        parse_model("correlation:0.05"), 1.0, T,
        default_param_grid(parse_model("correlation:0.05")),
    ).argmin
    pos = sweep_parametric_noise(
        parse_model("correlation:0.7"), 1.0, T,
        default_param_grid(parse_model("correlation:0.7")),
    ).argmin
    # mean model: optima symmetric about the data mean
    mean = ScalarModel(ModelKind.GAUSSIAN_MEAN, 2.0)
    sweep = sweep_parametric_noise(mean, 1.0, T, default_param_grid(mean))
    locs = sorted(x for x, _ in sweep.local_minima)
    symmetric = len(locs) == 2 and abs((locs[0] - 2.0) + (locs[1] - 2.0)) < 1e-4
    elapsed = time.perf_counter() - start
    ok = spread < 0.01 and neg < 0.0 < pos and symmetric
    _report(13, ok, f"variance scaling spread {spread:.2%} (tol 1%), correlation "
                    f"optima {neg:.4f} -> {pos:.4f} (sign change), mean optima "
                    f"{'symmetric' if symmetric else 'asymmetric'}, {elapsed:.1f}s")
