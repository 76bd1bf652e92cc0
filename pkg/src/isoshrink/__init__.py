"""Bayesian isotonic regression with half global-local shrinkage priors.

A nondecreasing function is estimated by placing half-horseshoe,
half-Laplace or half-normal priors on the positive first-order differences
of its values and sampling the exact blocked Gibbs conditionals.
"""

from .model import (
    ChainError,
    ChainState,
    Direction,
    ModelConfig,
    PosteriorDraws,
    PriorFamily,
    SamplerConfig,
    SeriesData,
    run_chain,
    run_chain_fixed_scales,
    theta_from_eta,
)
from .posterior import (
    EvalMetrics,
    PosteriorSummary,
    evaluate,
    interpolate_draws,
    max_increment_location,
    summarize,
)
from .rng import GigParams, RngStream
from .simulate import ReplicationPlan, Scenario, generate_dataset, run_replications

__version__ = "0.1.0"

__all__ = [
    "ChainError",
    "ChainState",
    "Direction",
    "EvalMetrics",
    "GigParams",
    "ModelConfig",
    "PosteriorDraws",
    "PosteriorSummary",
    "PriorFamily",
    "ReplicationPlan",
    "RngStream",
    "SamplerConfig",
    "Scenario",
    "SeriesData",
    "evaluate",
    "generate_dataset",
    "interpolate_draws",
    "max_increment_location",
    "run_chain",
    "run_chain_fixed_scales",
    "run_replications",
    "summarize",
    "theta_from_eta",
]
