"""Bayesian latent space inference for ranked dynamic networks."""

from .backend import BACKEND
from .core import (
    ConfigurationError,
    Hyperparams,
    ModelParams,
    NumericalError,
    PanelValidationError,
    RankPanel,
    distance,
    mean_utility,
    ordering_of,
    row_loglik,
    row_loglik_topq,
    total_loglik,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigurationError",
    "Hyperparams",
    "ModelParams",
    "NumericalError",
    "PanelValidationError",
    "RankPanel",
    "distance",
    "mean_utility",
    "ordering_of",
    "row_loglik",
    "row_loglik_topq",
    "total_loglik",
    "__version__",
]
