"""Container for stored posterior draws."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, ModelParams


@dataclass
class PosteriorDraws:
    """Aligned posterior draws, one row per stored iteration.

    ``X`` holds latent positions aligned to the common post-burn-in frame;
    ``tau`` holds the transition precisions for times 2..T.
    """

    X: np.ndarray        # (S, T, n, p)
    r: np.ndarray        # (S, n)
    tau0: np.ndarray     # (S,)
    tau1: np.ndarray     # (S,)
    tau: np.ndarray      # (S, T-1)
    theta: np.ndarray    # (S,)
    iters: np.ndarray    # (S,) iteration index of each draw

    def __post_init__(self) -> None:
        S = self.X.shape[0]
        for name in ("r", "tau0", "tau1", "tau", "theta", "iters"):
            if getattr(self, name).shape[0] != S:
                raise ConfigurationError(f"draw column {name!r} has mismatched length")
        if self.X.ndim != 4:
            raise ConfigurationError(f"X draws must be (S, T, n, p), got {self.X.shape}")
        if self.tau.shape[1] != self.T - 1:
            raise ConfigurationError("tau draws must have T - 1 columns")

    @property
    def size(self) -> int:
        return self.X.shape[0]

    @property
    def T(self) -> int:
        return self.X.shape[1]

    @property
    def n(self) -> int:
        return self.X.shape[2]

    @property
    def p(self) -> int:
        return self.X.shape[3]

    def params_at(self, s: int) -> ModelParams:
        return ModelParams(
            r=self.r[s].copy(),
            tau0=float(self.tau0[s]),
            tau1=float(self.tau1[s]),
            tau=self.tau[s].copy(),
            theta=float(self.theta[s]),
        )

    def mean_positions(self) -> np.ndarray:
        """(T, n, p) posterior-mean latent positions."""
        return self.X.mean(axis=0)

    def mean_reach(self) -> np.ndarray:
        return self.r.mean(axis=0)
