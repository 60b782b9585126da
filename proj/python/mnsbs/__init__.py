"""Multivariate nonparametric change-point detection and inference.

Thin wrapper over the compiled extension. The main entry points:

    simulate(scenario, T=..., p=..., seed=...) -> (data, true_cps)
    detect(data, **tuning) -> dict
    infer(data, estimates=None, alphas=[0.05], **tuning) -> dict
    quantile_table(n_draws=..., seed=...) -> dict
    hausdorff(estimates, truth, T) -> float

Time indices are 1-based: a change point at t means the distribution
switches between observations t and t+1, and estimates live in [1, T-1].
"""

from ._mnsbs import (
    ConfigError,
    InputError,
    NumericError,
    detect,
    hausdorff,
    infer,
    quantile_table,
    simulate,
)

__all__ = [
    "ConfigError",
    "InputError",
    "NumericError",
    "detect",
    "hausdorff",
    "infer",
    "quantile_table",
    "simulate",
]
