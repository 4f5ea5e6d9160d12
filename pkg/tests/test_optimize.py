import math

import numpy as np
import pytest

from ncenoise.asymptotics import generalized_moments, asymptotic_mse
from ncenoise.densities import HistogramDensity, ParametricNoise, default_edges_for
from ncenoise.errors import ConstructionError
from ncenoise.models import ModelKind, ScalarModel
from ncenoise.optimize import (
    default_param_grid,
    mse_gradient_logits,
    optimize_histogram,
    optimize_proportion,
    same_family_optimal_noise,
    sweep_parametric_noise,
)
from ncenoise.quadrature import default_grid_for


class TestSweepParametricNoise:
    def test_mean_model_two_symmetric_minima(self):
        """At nu = 1 the same-family sweep for the mean model has two
        symmetric local minima near theta +/- 1.43, strictly better than
        the data-noise point at theta itself."""
        model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
        sweep = sweep_parametric_noise(model, 1.0, 1000, np.linspace(-4, 4, 161))
        assert len(sweep.local_minima) == 2
        locs = sorted(x for x, _ in sweep.local_minima)
        assert locs[0] == pytest.approx(-locs[1], abs=1e-3)
        assert abs(locs[1]) == pytest.approx(1.427, abs=0.02)
        grid = default_grid_for(model)
        at_data = asymptotic_mse(
            1000, generalized_moments(model, ParametricNoise(model), 1.0, grid)
        )
        assert sweep.min_value < at_data

    def test_refinement_beats_grid(self):
        model = ScalarModel(ModelKind.GAUSSIAN_VARIANCE, 1.0)
        axis = np.logspace(np.log10(0.2), np.log10(20.0), 41)
        sweep = sweep_parametric_noise(model, 1.0, 1000, axis)
        assert sweep.min_value <= np.nanmin(sweep.values) + 1e-15
        assert sweep.argmin not in set(axis.tolist())

    def test_degenerate_points_become_nan(self):
        model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
        axis = np.array([-60.0, -1.0, 0.0, 1.0, 60.0])
        sweep = sweep_parametric_noise(model, 1.0, 1000, axis)
        assert np.isnan(sweep.values[0]) and np.isnan(sweep.values[-1])
        assert np.isfinite(sweep.values[1:4]).all()

    def test_threads_do_not_change_results(self):
        model = ScalarModel(ModelKind.GAUSSIAN_VARIANCE, 2.0)
        axis = default_param_grid(model, 31)
        a = sweep_parametric_noise(model, 0.5, 500, axis, threads=1)
        b = sweep_parametric_noise(model, 0.5, 500, axis, threads=4)
        np.testing.assert_array_equal(a.values, b.values)
        assert a.argmin == b.argmin and a.min_value == b.min_value

    def test_kl_objective_scales_mse_for_scalar(self):
        model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
        axis = np.linspace(-3, 3, 25)
        mse = sweep_parametric_noise(model, 1.0, 1000, axis, objective="mse")
        kl = sweep_parametric_noise(model, 1.0, 1000, axis, objective="kl")
        np.testing.assert_allclose(kl.values, mse.values / 2.0, rtol=1e-12)


class TestOptimizeHistogram:
    def test_gradient_matches_finite_differences(self):
        model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
        edges = np.linspace(-4, 4, 17)
        rng = np.random.default_rng(21)
        logits = rng.normal(scale=0.3, size=16)
        hist = HistogramDensity(edges, logits)
        grid = default_grid_for(model)
        grad = mse_gradient_logits(model, hist, 1.0, 1000, grid)

        from ncenoise.optimize import (
            _histogram_objective_and_grad,
            _histogram_objective_setup,
        )
        from ncenoise.asymptotics import MomentWorkspace

        ws = MomentWorkspace(model, grid)
        bin_of_node, node_valid = _histogram_objective_setup(ws, hist)

        def f(x):
            return _histogram_objective_and_grad(
                ws, hist, x, 1.0, 1000, "mse", bin_of_node, node_valid
            )[0]

        h = 1e-6
        fd = np.empty_like(logits)
        for j in range(logits.size):
            e = np.zeros_like(logits)
            e[j] = h
            fd[j] = (f(logits + e) - f(logits - e)) / (2.0 * h)
        np.testing.assert_allclose(grad, fd, rtol=5e-5, atol=1e-12)

    def test_descends_and_converges(self):
        model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
        edges = default_edges_for(model)
        hist, trace = optimize_histogram(
            model, 1.0, 1000, edges, np.zeros(edges.size - 1)
        )
        objs = np.array(trace.objective_history)
        assert (np.diff(objs) <= 0.0).all()
        assert trace.converged
        assert objs[-1] < objs[0]
        assert hist.masses.sum() == pytest.approx(1.0, rel=1e-12)

    def test_max_iter_zero_returns_init(self):
        model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
        edges = np.linspace(-4, 4, 9)
        logits = np.arange(8.0)
        hist, trace = optimize_histogram(model, 1.0, 1000, edges, logits, max_iter=0)
        np.testing.assert_array_equal(hist.logits, logits)
        assert trace.iterations == 0
        assert len(trace.objective_history) == 1

    def test_rejects_negative_max_iter(self):
        model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
        with pytest.raises(ConstructionError):
            optimize_histogram(model, 1.0, 1000, np.linspace(-1, 1, 5), np.zeros(4), max_iter=-1)

    def test_beats_same_family_optimum(self):
        """The optimized histogram does at least as well as the best
        same-family Gaussian noise (it has far more degrees of freedom)."""
        model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
        edges = default_edges_for(model)
        hist, _ = optimize_histogram(model, 1.0, 1000, edges, np.zeros(edges.size - 1))
        grid = default_grid_for(model)
        h_mse = asymptotic_mse(1000, generalized_moments(model, hist, 1.0, grid))
        _, sweep = same_family_optimal_noise(model, 1.0, 1000)
        assert h_mse <= sweep.min_value * (1.0 + 1e-3)


class TestOptimizeProportion:
    def test_data_noise_optimum_is_half(self):
        """With p_n = p_d the MSE is proportional to (nu+1)^2/nu, which
        is minimized at nu = 1, i.e. a 50% noise proportion."""
        model = ScalarModel(ModelKind.GAUSSIAN_VARIANCE, 1.0)
        sweep = optimize_proportion(model, ParametricNoise(model), 1000)
        assert sweep.argmin == pytest.approx(0.5, abs=1e-4)
        assert sweep.min_value == pytest.approx(4.0 * 2.0 / 1000, rel=1e-6)

    def test_threads_do_not_change_results(self):
        model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
        noise = ParametricNoise(model.with_theta(1.0))
        a = optimize_proportion(model, noise, 500, n_points=49, threads=1)
        b = optimize_proportion(model, noise, 500, n_points=49, threads=3)
        np.testing.assert_array_equal(a.values, b.values)
        assert a.argmin == b.argmin

    def test_axis_spans_unit_interval_interior(self):
        model = ScalarModel(ModelKind.GAUSSIAN_MEAN, 0.0)
        sweep = optimize_proportion(model, ParametricNoise(model), 100, n_points=25)
        assert sweep.axis[0] == pytest.approx(0.01)
        assert sweep.axis[-1] == pytest.approx(0.99)


def test_same_family_optimal_noise_returns_parametric():
    model = ScalarModel(ModelKind.GAUSSIAN_VARIANCE, 2.0)
    noise, sweep = same_family_optimal_noise(model, 1.0, 1000, n_points=121)
    assert isinstance(noise, ParametricNoise)
    assert noise.model.theta == pytest.approx(sweep.argmin)
    assert sweep.argmin > model.theta  # wider noise than data


def test_default_param_grid_ranges():
    mean = ScalarModel(ModelKind.GAUSSIAN_MEAN, 2.0)
    g = default_param_grid(mean, 11)
    assert g[0] == pytest.approx(-3.0) and g[-1] == pytest.approx(7.0)
    var = ScalarModel(ModelKind.GAUSSIAN_VARIANCE, 2.0)
    g = default_param_grid(var, 11)
    assert g[0] == pytest.approx(0.1) and g[-1] == pytest.approx(40.0)
    corr = ScalarModel(ModelKind.GAUSSIAN_CORRELATION, 0.0)
    g = default_param_grid(corr, 11)
    assert (np.abs(g) <= 0.95 + 1e-12).all()
