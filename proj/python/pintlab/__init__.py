"""Parallel-in-time ODE solvers with learned correctors."""

from ._core import (
    GpHyperparams,
    ScalarGp,
    fit_hyperparams,
    integrate,
    log_marginal_likelihood,
    ode_systems,
    rhs,
    run,
    serial_fine,
    speedup,
    system_info,
    theoretical_runtime,
)

__all__ = [
    "GpHyperparams",
    "ScalarGp",
    "fit_hyperparams",
    "integrate",
    "log_marginal_likelihood",
    "ode_systems",
    "rhs",
    "run",
    "serial_fine",
    "speedup",
    "system_info",
    "theoretical_runtime",
]
