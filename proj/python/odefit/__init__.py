"""Parameter estimation for nonlinear ODE systems (C++ core)."""

import json

from ._odefit import (
    CsvError,
    IntegrationDiverged,
    OptimizerError,
    cost,
    estimate,
    fd_gradient,
    generate_dataset,
    gradient_descent,
    levenberg_marquardt,
    nelder_mead,
    problem_info,
    problem_names,
    rmse,
    simulate,
)
from ._odefit import benchmark_json as _benchmark_json

OPTIMIZERS = ("gradient", "lm", "nelder_mead")


def benchmark(problem, noise_variance=0.1, seed=0, optimizers=None, initial_spread=0.3):
    """Run the benchmark protocol and return the report as a dict."""
    return json.loads(
        _benchmark_json(problem, noise_variance, seed,
                        None if optimizers is None else list(optimizers), initial_spread))


__all__ = [
    "OPTIMIZERS",
    "CsvError",
    "IntegrationDiverged",
    "OptimizerError",
    "benchmark",
    "cost",
    "estimate",
    "fd_gradient",
    "generate_dataset",
    "gradient_descent",
    "levenberg_marquardt",
    "nelder_mead",
    "problem_info",
    "problem_names",
    "rmse",
    "simulate",
]
