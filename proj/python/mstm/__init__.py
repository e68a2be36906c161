"""Multihop stochastic knowledge transfer toolkit."""

from ._core import (
    Model,
    accuracy,
    cross_entropy,
    hop,
    mse,
    run_config,
    run_synthetic,
    subset_size,
    submodularity_ratio,
    synthetic_dataset,
    temperature_soften,
)

__all__ = [
    "Model",
    "accuracy",
    "cross_entropy",
    "hop",
    "mse",
    "run_config",
    "run_synthetic",
    "subset_size",
    "submodularity_ratio",
    "synthetic_dataset",
    "temperature_soften",
]
