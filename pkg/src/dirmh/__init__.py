"""Directional Metropolis-Hastings: gradient-oriented proposal covariance,
adaptive scale, baseline kernels, targets and chain diagnostics."""

from .adaptive import AdaptState, AdaptTrace, delta, run_adaptive_chain, update_scale
from .diagnostics import (
    DiagnosticsReport,
    autocorrelation,
    batch_means_variance,
    diagnose,
    drift_ratio_estimate,
    ess_univariate,
    iact,
    mess,
    msjd,
)
from .geometry import Direction, ProposalShape, sample_proposal, unit_gradient
from .kernels import Chain, Flavor, KernelConfig, StepResult, log_hastings_ratio, mh_step, run_chain
from .targets import (
    BananaTarget,
    Family,
    GaussianTarget,
    GlmData,
    GlmPosterior,
    TargetDensity,
    banana_target,
    gaussian_target,
    numeric_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptState",
    "AdaptTrace",
    "delta",
    "run_adaptive_chain",
    "update_scale",
    "DiagnosticsReport",
    "autocorrelation",
    "batch_means_variance",
    "diagnose",
    "drift_ratio_estimate",
    "ess_univariate",
    "iact",
    "mess",
    "msjd",
    "Direction",
    "ProposalShape",
    "sample_proposal",
    "unit_gradient",
    "Chain",
    "Flavor",
    "KernelConfig",
    "StepResult",
    "log_hastings_ratio",
    "mh_step",
    "run_chain",
    "BananaTarget",
    "Family",
    "GaussianTarget",
    "GlmData",
    "GlmPosterior",
    "TargetDensity",
    "banana_target",
    "gaussian_target",
    "numeric_gradient",
]
