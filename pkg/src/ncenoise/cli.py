"""Command-line front end.

Subcommands evaluate the asymptotic error of a configuration, sweep
noise parameters or proportions, optimize a histogram noise, tabulate
the closed-form optimal noises, run replicated finite-sample fits, and
reproduce the preconfigured figure pipelines.  All outputs are CSV or
JSON files written atomically (temp file + rename), so re-running a
subcommand with the same configuration and seeds produces byte-identical
artifacts.

Configuration comes from flags, optionally over a flat ``key=value``
config file with the same keys; flags override the file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, fields, replace

import numpy as np

from .asymptotics import asymptotic_mse, cramer_rao_mse, efficiency_report, \
    generalized_moments
from .densities import (
    ParametricNoise,
    default_edges_for,
    uniform_histogram,
)
from .errors import ConstructionError, DegeneracyError, NumericError, \
    ParameterDomainError
from .models import ModelKind, ScalarModel, format_model, parse_model
from .optimize import (
    default_param_grid,
    optimize_histogram,
    optimize_proportion,
    same_family_optimal_noise,
    sweep_parametric_noise,
)
from .quadrature import default_grid_for
from .simulate import empirical_mse
from .theory import optimal_noise_all_data, optimal_noise_all_noise

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


# -- configuration ------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """Flat run configuration shared by all subcommands.

    Field names map one-to-one onto CLI flags and config-file keys
    (underscores exchanged for dashes).  ``format_config`` and
    ``parse_config`` round-trip exactly.
    """

    model: str | None = None
    noise: str | None = None
    nu: float | None = None
    proportion: float | None = None
    T: int = 10000
    grid_n: int | None = None
    grid_range: float = 8.0
    seed: int = 0
    replicates: int = 100
    out: str = "."
    threads: int = 1
    objective: str = "mse"

    def __post_init__(self):
        if self.objective not in ("mse", "kl"):
            raise ConstructionError(
                f"objective must be 'mse' or 'kl', got {self.objective!r}"
            )
        if self.nu is not None and not self.nu > 0.0:
            raise ConstructionError(f"nu must be positive, got {self.nu}")
        if self.proportion is not None and not 0.0 < self.proportion < 1.0:
            raise ConstructionError(
                f"proportion must be in (0, 1), got {self.proportion}"
            )
        if self.T < 1:
            raise ConstructionError(f"T must be >= 1, got {self.T}")
        if self.threads < 1:
            raise ConstructionError(f"threads must be >= 1, got {self.threads}")

    def resolved_nu(self) -> float:
        """nu from either --nu or --proportion; --nu wins when both given."""
        if self.nu is not None:
            return float(self.nu)
        if self.proportion is not None:
            return self.proportion / (1.0 - self.proportion)
        return 1.0


_CONFIG_TYPES = {
    "model": str,
    "noise": str,
    "nu": float,
    "proportion": float,
    "T": int,
    "grid_n": int,
    "grid_range": float,
    "seed": int,
    "replicates": int,
    "out": str,
    "threads": int,
    "objective": str,
}


def format_config(cfg: RunConfig) -> str:
    """Serialize to flat ``key=value`` lines, omitting unset fields."""
    lines = []
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        key = f.name.replace("_", "-")
        lines.append(f"{key}={value!r}" if isinstance(value, str) else f"{key}={value:g}"
                     if isinstance(value, float) else f"{key}={value}")
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> RunConfig:
    """Parse flat ``key=value`` lines; blank lines and ``#`` comments ok."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConstructionError(f"config line {lineno}: missing '=' in {line!r}")
        attr = key.strip().replace("-", "_")
        if attr not in _CONFIG_TYPES:
            raise ConstructionError(f"config line {lineno}: unknown key {key.strip()!r}")
        typ = _CONFIG_TYPES[attr]
        value = value.strip()
        if typ is str and len(value) >= 2 and value[0] == value[-1] == "'":
            value = value[1:-1]
        try:
            values[attr] = typ(value)
        except ValueError as exc:
            raise ConstructionError(
                f"config line {lineno}: key {key.strip()!r} expects {typ.__name__}"
            ) from exc
    return RunConfig(**values)


def _merge_flags(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    overrides = {}
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    return replace(cfg, **overrides)


# -- noise construction -------------------------------------------------


def build_noise(spec: str, model: ScalarModel, grid):
    """Build a noise density from its CLI spec string.

    Specs: ``same-family:<param>``, ``histogram:<lo>:<hi>:<bins>`` (or
    ``histogram:default``, uniform weights), ``theory:<objective>:<regime>``
    with regime ``all-noise`` or ``all-data``.
    """
    kind, _, rest = spec.partition(":")
    if kind == "same-family":
        try:
            param = float(rest)
        except ValueError as exc:
            raise ConstructionError(f"noise: bad same-family parameter {rest!r}") from exc
        return ParametricNoise(model.with_theta(param))
    if kind == "histogram":
        return uniform_histogram(_parse_edges(rest, model), dim=model.dim)
    if kind == "theory":
        objective, _, regime = rest.partition(":")
        if regime == "all-noise":
            return optimal_noise_all_noise(model, objective, grid).density
        if regime == "all-data":
            return optimal_noise_all_data(model, objective, grid).density
        raise ConstructionError(
            f"noise: regime must be 'all-noise' or 'all-data', got {regime!r}"
        )
    raise ConstructionError(
        f"noise: unknown kind {kind!r}; use same-family | histogram | theory"
    )


def _parse_edges(spec: str, model: ScalarModel) -> np.ndarray:
    if spec in ("", "default"):
        return default_edges_for(model)
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConstructionError(
            f"noise: histogram spec must be '<lo>:<hi>:<bins>', got {spec!r}"
        )
    try:
        lo, hi, bins = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConstructionError(f"noise: bad histogram spec {spec!r}") from exc
    if not (lo < hi and bins >= 1):
        raise ConstructionError(f"noise: empty histogram box in {spec!r}")
    return np.linspace(lo, hi, bins + 1)


# -- atomic output ------------------------------------------------------


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_density_csv(path: str, density) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    os.close(fd)
    try:
        density.write_csv(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sweep_csv(sweep) -> str:
    lines = ["axis,value"]
    for x, v in zip(sweep.axis, sweep.values):
        lines.append(f"{float(x)!r},{float(v)!r}")
    return "\n".join(lines) + "\n"


def _sweep_json(sweep) -> str:
    return json.dumps(
        {
            "argmin": sweep.argmin,
            "min_value": sweep.min_value,
            "local_minima": [[x, v] for x, v in sweep.local_minima],
        },
        indent=2,
    )


def _write_sweep(out_dir: str, name: str, sweep) -> str:
    _atomic_write(os.path.join(out_dir, f"{name}.csv"), _sweep_csv(sweep))
    summary = _sweep_json(sweep)
    _atomic_write(os.path.join(out_dir, f"{name}.json"), summary + "\n")
    return summary


# -- subcommands --------------------------------------------------------


def _require(cfg: RunConfig, *names: str) -> None:
    for name in names:
        if getattr(cfg, name) is None:
            raise ConstructionError(f"missing required field '{name}'")


def _model_and_grid(cfg: RunConfig):
    _require(cfg, "model")
    model = parse_model(cfg.model)
    grid = default_grid_for(model, cfg.grid_n, cfg.grid_range)
    return model, grid


def cmd_mse(cfg: RunConfig) -> None:
    _require(cfg, "noise")
    model, grid = _model_and_grid(cfg)
    noise = build_noise(cfg.noise, model, grid)
    report = efficiency_report(model, noise, cfg.noise, cfg.resolved_nu(), cfg.T, grid)
    text = report.to_json()
    _atomic_write(os.path.join(cfg.out, "mse.json"), text + "\n")
    print(text)


def cmd_sweep_noise(cfg: RunConfig) -> None:
    model, grid = _model_and_grid(cfg)
    sweep = sweep_parametric_noise(
        model,
        cfg.resolved_nu(),
        cfg.T,
        default_param_grid(model),
        objective=cfg.objective,
        grid=grid,
        threads=cfg.threads,
    )
    print(_write_sweep(cfg.out, "sweep_noise", sweep))


def cmd_sweep_proportion(cfg: RunConfig) -> None:
    _require(cfg, "noise")
    model, grid = _model_and_grid(cfg)
    noise = build_noise(cfg.noise, model, grid)
    sweep = optimize_proportion(
        model, noise, cfg.T, objective=cfg.objective, grid=grid, threads=cfg.threads
    )
    print(_write_sweep(cfg.out, "sweep_proportion", sweep))


def cmd_optimize_histogram(cfg: RunConfig) -> None:
    model, grid = _model_and_grid(cfg)
    edges = _parse_edges(
        cfg.noise.partition(":")[2] if cfg.noise else "default", model
    )
    if cfg.noise and not cfg.noise.startswith("histogram"):
        raise ConstructionError(
            f"noise: optimize-histogram needs a histogram spec, got {cfg.noise!r}"
        )
    n_bins = (edges.size - 1) ** model.dim
    hist, trace = optimize_histogram(
        model,
        cfg.resolved_nu(),
        cfg.T,
        edges,
        np.zeros(n_bins),
        objective=cfg.objective,
        grid=grid,
    )
    _atomic_density_csv(os.path.join(cfg.out, "histogram.csv"), hist)
    summary = json.dumps(
        {
            "iterations": trace.iterations,
            "converged": trace.converged,
            "objective": trace.objective_history[-1],
            "gradient_norm": trace.gradient_norm_history[-1],
        },
        indent=2,
    )
    _atomic_write(os.path.join(cfg.out, "histogram.json"), summary + "\n")
    print(summary)


def cmd_theory_noise(cfg: RunConfig) -> None:
    _require(cfg, "noise")
    model, grid = _model_and_grid(cfg)
    kind, _, rest = cfg.noise.partition(":")
    if kind != "theory":
        raise ConstructionError(
            f"noise: theory-noise needs a 'theory:<objective>:<regime>' spec, "
            f"got {cfg.noise!r}"
        )
    objective, _, regime = rest.partition(":")
    if regime == "all-noise":
        result = optimal_noise_all_noise(model, objective, grid)
    elif regime == "all-data":
        result = optimal_noise_all_data(model, objective, grid)
    else:
        raise ConstructionError(
            f"noise: regime must be 'all-noise' or 'all-data', got {regime!r}"
        )
    _atomic_density_csv(os.path.join(cfg.out, "theory_noise.csv"), result.density)
    summary = json.dumps(
        {
            "objective": result.objective,
            "regime": result.regime,
            "eps1": result.eps1,
            "eps2": result.eps2,
            "dirac_candidates": list(result.dirac_candidates),
        },
        indent=2,
    )
    _atomic_write(os.path.join(cfg.out, "theory_noise.json"), summary + "\n")
    print(summary)


def cmd_simulate(cfg: RunConfig) -> None:
    _require(cfg, "noise")
    model, grid = _model_and_grid(cfg)
    noise = build_noise(cfg.noise, model, grid)
    nu = cfg.resolved_nu()
    report = empirical_mse(model, noise, nu, cfg.T, cfg.replicates, cfg.seed, grid)
    payload = {
        "model": format_model(model),
        "theta": model.theta,
        "noise": cfg.noise,
        "nu": nu,
        "T": cfg.T,
        "replicates": report.replicates,
        "failures": report.failures,
        "mse": report.mean_sq_error,
        "mse_se": report.std_error,
        "kl": report.mean_kl,
        "kl_se": report.kl_std_error,
        "predicted_mse": report.predicted_mse,
        "predicted_kl": report.predicted_kl,
    }
    text = json.dumps(payload, indent=2)
    _atomic_write(os.path.join(cfg.out, "simulate.json"), text + "\n")
    row = (
        f"{payload['model']},{payload['theta']!r},{payload['noise']},{nu!r},"
        f"{cfg.T},{report.replicates},{report.mean_sq_error!r},"
        f"{report.std_error!r},{report.mean_kl!r},{report.kl_std_error!r},"
        f"{report.predicted_mse!r},{report.predicted_kl!r}"
    )
    _atomic_write(
        os.path.join(cfg.out, "simulate.csv"),
        report.CSV_HEADER + "\n" + row + "\n",
    )
    print(text)


# -- figure pipelines ---------------------------------------------------


_FIGURE_MODELS = {
    "a": "mean:0",
    "b": "variance:1",
    "c": "correlation:0.3",
}


def _figure_1(cfg: RunConfig) -> None:
    """Optimal same-family noise parameter vs the data parameter, nu=1."""
    panels = {
        "a": [ScalarModel(ModelKind.GAUSSIAN_MEAN, t) for t in (-2.0, -1.0, 0.0, 1.0, 2.0)],
        "b": [ScalarModel(ModelKind.GAUSSIAN_VARIANCE, t) for t in (0.5, 1.0, 2.0, 4.0)],
        "c": [
            ScalarModel(ModelKind.GAUSSIAN_CORRELATION, t)
            for t in (-0.5, -0.25, -0.05, 0.0, 0.05, 0.25, 0.5)
        ],
    }
    for panel, models in panels.items():
        lines = ["data_theta,optimal_noise_theta,min_value"]
        for model in models:
            grid = default_grid_for(model, cfg.grid_n, cfg.grid_range)
            _, sweep = same_family_optimal_noise(model, 1.0, cfg.T, cfg.objective, grid)
            lines.append(f"{model.theta!r},{sweep.argmin!r},{sweep.min_value!r}")
        _atomic_write(
            os.path.join(cfg.out, f"figure1{panel}.csv"), "\n".join(lines) + "\n"
        )


def _figure_2(cfg: RunConfig, panel: str) -> None:
    """Histogram-optimized noise at three ratios with theory overlays."""
    model = parse_model("variance:1" if panel == "a" else "mean:0")
    grid = default_grid_for(model, cfg.grid_n, cfg.grid_range)
    edges = default_edges_for(model)
    for nu, tag in ((0.01, "all_data"), (1.0, "balanced"), (100.0, "all_noise")):
        hist, _ = optimize_histogram(
            model, nu, cfg.T, edges, np.zeros(edges.size - 1),
            objective=cfg.objective, grid=grid,
        )
        _atomic_density_csv(
            os.path.join(cfg.out, f"figure2{panel}_histogram_{tag}.csv"), hist
        )
    for regime, builder in (
        ("all_noise", optimal_noise_all_noise),
        ("all_data", optimal_noise_all_data),
    ):
        result = builder(model, cfg.objective, grid)
        _atomic_density_csv(
            os.path.join(cfg.out, f"figure2{panel}_theory_{regime}.csv"), result.density
        )


def _figure_3(cfg: RunConfig) -> None:
    """Correlation-model data density and optimal noise densities."""
    from .densities import TabulatedDensity

    n = cfg.grid_n if cfg.grid_n is not None else 121
    for theta in (0.0, 0.3):
        model = ScalarModel(ModelKind.GAUSSIAN_CORRELATION, theta)
        grid = default_grid_for(model, n, cfg.grid_range)
        tag = f"{theta:g}".replace(".", "p").replace("-", "m")
        data = TabulatedDensity(grid, model.density(grid.nodes))
        _atomic_density_csv(os.path.join(cfg.out, f"figure3_data_{tag}.csv"), data)
        for regime, builder in (
            ("all_noise", optimal_noise_all_noise),
            ("all_data", optimal_noise_all_data),
        ):
            result = builder(model, cfg.objective, grid)
            _atomic_density_csv(
                os.path.join(cfg.out, f"figure3_theory_{regime}_{tag}.csv"),
                result.density,
            )
        edges = default_edges_for(model, 24)
        hist, _ = optimize_histogram(
            model, 1.0, cfg.T, edges, np.zeros((edges.size - 1) ** 2),
            objective=cfg.objective, grid=grid,
        )
        _atomic_density_csv(
            os.path.join(cfg.out, f"figure3_histogram_{tag}.csv"), hist
        )


def _figure_4(cfg: RunConfig) -> None:
    """Asymptotic MSE vs noise proportion for three noise choices."""
    proportions = np.linspace(0.02, 0.98, 49)
    for panel, spec in _FIGURE_MODELS.items():
        model = parse_model(spec)
        grid = default_grid_for(model, cfg.grid_n, cfg.grid_range)
        data_noise = ParametricNoise(model)
        parametric, _ = same_family_optimal_noise(model, 1.0, cfg.T, cfg.objective, grid)
        all_noise_opt = optimal_noise_all_noise(model, cfg.objective, grid).density
        fisher = model.fisher_information()
        lines = ["proportion,data_noise,parametric,all_noise_optimal,cramer_rao"]
        for pi in proportions:
            nu = pi / (1.0 - pi)
            row = [repr(float(pi))]
            for noise in (data_noise, parametric, all_noise_opt):
                mp = generalized_moments(model, noise, nu, grid)
                row.append(repr(asymptotic_mse(cfg.T, mp)))
            row.append(repr(cramer_rao_mse(max(int(round(cfg.T * (1.0 - pi))), 1), fisher)))
            lines.append(",".join(row))
        _atomic_write(
            os.path.join(cfg.out, f"figure4{panel}.csv"), "\n".join(lines) + "\n"
        )


def _figure_5(cfg: RunConfig) -> None:
    """Optimal noise proportion vs the same-family noise parameter."""
    panels = {
        "a": ("mean:0", np.linspace(-2.0, 2.0, 17)),
        "b": ("variance:1", np.geomspace(0.25, 8.0, 13)),
        "c": ("correlation:0.3", np.linspace(-0.8, 0.8, 17)),
    }
    for panel, (spec, params) in panels.items():
        model = parse_model(spec)
        grid = default_grid_for(model, cfg.grid_n, cfg.grid_range)
        lines = ["noise_theta,optimal_proportion,min_value"]
        for param in params:
            noise = ParametricNoise(model.with_theta(float(param)))
            sweep = optimize_proportion(
                model, noise, cfg.T, objective=cfg.objective, grid=grid,
                threads=cfg.threads,
            )
            lines.append(f"{float(param)!r},{sweep.argmin!r},{sweep.min_value!r}")
        _atomic_write(
            os.path.join(cfg.out, f"figure5{panel}.csv"), "\n".join(lines) + "\n"
        )


def _figure_s1(cfg: RunConfig) -> None:
    """MSE landscape over the same-family noise parameter, nu=1."""
    for panel, spec in _FIGURE_MODELS.items():
        model = parse_model(spec)
        grid = default_grid_for(model, cfg.grid_n, cfg.grid_range)
        sweep = sweep_parametric_noise(
            model, 1.0, cfg.T, default_param_grid(model), objective="mse",
            grid=grid, threads=cfg.threads,
        )
        _write_sweep(cfg.out, f"figureS1{panel}", sweep)


def _figure_s6(cfg: RunConfig) -> None:
    """Expected KL error over the noise mean for the mean model, nu=1."""
    model = parse_model("mean:0")
    grid = default_grid_for(model, cfg.grid_n, cfg.grid_range)
    sweep = sweep_parametric_noise(
        model, 1.0, cfg.T, default_param_grid(model), objective="kl",
        grid=grid, threads=cfg.threads,
    )
    _write_sweep(cfg.out, "figureS6", sweep)


_FIGURES = {
    "1": _figure_1,
    "2a": lambda cfg: _figure_2(cfg, "a"),
    "2b": lambda cfg: _figure_2(cfg, "b"),
    "3": _figure_3,
    "4": _figure_4,
    "5": _figure_5,
    "S1": _figure_s1,
    "S6": _figure_s6,
}


def cmd_reproduce_figure(cfg: RunConfig, figure: str) -> None:
    _FIGURES[figure](cfg)
    print(f"figure {figure} artifacts written to {cfg.out}")


# -- argument parsing ---------------------------------------------------


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--model", help="mean:<t> | variance:<t> | correlation:<t>")
    parser.add_argument(
        "--noise",
        help="same-family:<param> | histogram:<lo>:<hi>:<bins> | "
        "theory:<objective>:<regime>",
    )
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--nu", type=float, help="noise-data ratio T_n/T_d")
    group.add_argument(
        "--proportion", type=float, help="noise proportion nu/(1+nu) in (0, 1)"
    )
    parser.add_argument("--T", type=int, help="total sample budget T_d + T_n")
    parser.add_argument("--grid-n", type=int, dest="grid_n", help="quadrature nodes per axis")
    parser.add_argument(
        "--grid-range", type=float, dest="grid_range",
        help="quadrature half-range in data standard deviations",
    )
    parser.add_argument("--seed", type=int, help="master seed for sampling")
    parser.add_argument("--replicates", type=int, help="Monte Carlo replicates")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--threads", type=int, help="parallel evaluation threads")
    parser.add_argument("--objective", choices=("mse", "kl"), help="optimization target")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncenoise",
        description="Asymptotic efficiency of noise-contrastive estimation "
        "as a function of the noise distribution.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("mse", "asymptotic MSE/KL report for one configuration"),
        ("sweep-noise", "objective over a same-family noise parameter"),
        ("sweep-proportion", "objective over the noise proportion"),
        ("optimize-histogram", "conjugate-gradient histogram noise optimization"),
        ("theory-noise", "tabulate a closed-form optimal noise"),
        ("simulate", "replicated finite-sample estimation"),
    ):
        _add_common_flags(sub.add_parser(name, help=help_text))
    fig = sub.add_parser("reproduce-figure", help="run a preconfigured figure pipeline")
    fig.add_argument("figure", choices=sorted(_FIGURES))
    _add_common_flags(fig)
    return parser


_COMMANDS = {
    "mse": cmd_mse,
    "sweep-noise": cmd_sweep_noise,
    "sweep-proportion": cmd_sweep_proportion,
    "optimize-histogram": cmd_optimize_histogram,
    "theory-noise": cmd_theory_noise,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig()
        if args.config:
            try:
                with open(args.config) as fh:
                    cfg = parse_config(fh.read())
            except OSError as exc:
                raise ConstructionError(f"config: cannot read {args.config}: {exc}")
        cfg = _merge_flags(cfg, args)
        if args.command == "reproduce-figure":
            cmd_reproduce_figure(cfg, args.figure)
        else:
            _COMMANDS[args.command](cfg)
    except (ConstructionError, ParameterDomainError) as exc:
        print(f"ncenoise: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, DegeneracyError) as exc:
        print(f"ncenoise: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
