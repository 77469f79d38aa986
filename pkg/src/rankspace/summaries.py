"""Scalar posterior summaries: fit, stability comparisons, step sizes, correlations."""

from __future__ import annotations

import numpy as np

from .core import ConfigurationError, NumericalError, RankPanel
from .draws import PosteriorDraws


def pseudo_r2(panel: RankPanel, draws: PosteriorDraws) -> float:
    """Share of latent-utility variation explained by the posterior means.

    Mean utilities log(r_hat_j) - d_hat_ijt are computed from posterior-mean
    reaches and (aligned) positions; the unexplained part is the Gumbel
    noise variance pi^2/6 per term, pi^2 (T n (n-1) - 2) / 6 in total.
    """
    if draws.size == 0:
        raise ConfigurationError("no posterior draws")
    n, T = panel.n, panel.T
    if (draws.n, draws.T) != (n, T):
        raise ConfigurationError("draws do not match the panel dimensions")
    r_hat = draws.mean_reach()
    X_hat = draws.mean_positions()
    mus = []
    for t in range(T):
        diff = X_hat[t][:, None, :] - X_hat[t][None, :, :]
        d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        mu_t = np.log(r_hat)[None, :] - d
        off = ~np.eye(n, dtype=bool)
        mus.append(mu_t[off])
    mu_flat = np.concatenate(mus)
    ss = float(np.sum((mu_flat - mu_flat.mean()) ** 2))
    noise = np.pi ** 2 * (T * n * (n - 1) - 2) / 6.0
    return ss / (ss + noise)


def stability_table(draws: PosteriorDraws) -> np.ndarray:
    """q[r, c] = posterior fraction of draws with tau_{c+2} > tau_{r+2}.

    Rows and columns are labeled by times 2..T (index 0 is time 2); the
    diagonal is reported as 0 by table convention.
    """
    if draws.size == 0:
        raise ConfigurationError("no posterior draws")
    tau = draws.tau
    m = tau.shape[1]
    table = np.empty((m, m))
    for a in range(m):
        for b in range(m):
            table[a, b] = 0.0 if a == b else float(np.mean(tau[:, b] > tau[:, a]))
    return table


def step_sizes(draws: PosteriorDraws) -> np.ndarray:
    """Average per-actor step length of the posterior-mean trajectories."""
    if draws.size == 0:
        raise ConfigurationError("no posterior draws")
    X_hat = draws.mean_positions()
    steps = np.sqrt(np.sum(np.diff(X_hat, axis=0) ** 2, axis=2))  # (T-1, n)
    return steps.mean(axis=0)


def mean_received_rank(panel: RankPanel) -> np.ndarray:
    """Average rank each actor receives from the others over all times."""
    n, T = panel.n, panel.T
    totals = np.zeros(n)
    for t in range(T):
        y = panel.y[t].astype(np.float64)
        totals += y.sum(axis=0)  # diagonal contributes 0
    return totals / ((n - 1) * T)


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    if np.std(a) == 0.0 or np.std(b) == 0.0:
        raise NumericalError("correlation undefined: zero variance input")
    return float(np.corrcoef(a, b)[0, 1])


def popularity_correlations(panel: RankPanel, draws: PosteriorDraws,
                            ) -> tuple[float, float]:
    """(corr(step size, log reach), corr(log reach, mean received rank))."""
    log_r = np.log(draws.mean_reach())
    s = step_sizes(draws)
    return _pearson(s, log_r), _pearson(log_r, mean_received_rank(panel))
