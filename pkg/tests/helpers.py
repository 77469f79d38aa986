"""Shared test oracles: independent brute-force implementations.

Everything here is deliberately naive (explicit loops, no suffix sums,
no log-domain tricks) so it stays independent of the code under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from rankspace import RankPanel


def random_panel(rng: np.random.Generator, n: int, T: int) -> RankPanel:
    """A valid random rank panel."""
    y = np.zeros((T, n, n), dtype=np.int64)
    for t in range(T):
        for i in range(n):
            others = [j for j in range(n) if j != i]
            rng.shuffle(others)
            for rank, j in enumerate(others, start=1):
                y[t, i, j] = rank
    return RankPanel(y)


def panel_with_row(n: int, i: int, ordering: tuple[int, ...]) -> RankPanel:
    """T=1 panel whose row i follows ``ordering`` (0-based actor indices);
    all other rows rank actors in index order."""
    y = np.zeros((1, n, n), dtype=np.int64)
    for k in range(n):
        if k == i:
            for rank, j in enumerate(ordering, start=1):
                y[0, i, j] = rank
        else:
            others = [j for j in range(n) if j != k]
            for rank, j in enumerate(others, start=1):
                y[0, k, j] = rank
    return RankPanel(y)


def nu_matrix(X: np.ndarray, r: np.ndarray, t: int) -> np.ndarray:
    """Choice weights nu[i, j] = r_j * exp(-||X_ti - X_tj||)."""
    n = r.shape[0]
    nu = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                d = math.dist(X[t, i], X[t, j])
                nu[i, j] = r[j] * math.exp(-d)
    return nu


def brute_force_row_probs(X: np.ndarray, r: np.ndarray, t: int, i: int,
                          ) -> dict[tuple[int, ...], float]:
    """Probability of every ordering of row (t, i) by direct products."""
    n = r.shape[0]
    nu = nu_matrix(X, r, t)
    others = [j for j in range(n) if j != i]
    probs: dict[tuple[int, ...], float] = {}
    for perm in itertools.permutations(others):
        prob = 1.0
        remaining = list(perm)
        for j in perm:
            prob *= nu[i, j] / sum(nu[i, k] for k in remaining)
            remaining.remove(j)
        probs[perm] = prob
    return probs


def brute_force_prefix_prob(X: np.ndarray, r: np.ndarray, t: int, i: int,
                            prefix: tuple[int, ...]) -> float:
    """Marginal probability that row (t, i) starts with ``prefix``."""
    probs = brute_force_row_probs(X, r, t, i)
    return sum(p for perm, p in probs.items() if perm[: len(prefix)] == prefix)


def naive_total_loglik(panel: RankPanel, X: np.ndarray, r: np.ndarray,
                       q: int | None = None) -> float:
    """Triple-loop total log-likelihood with explicit denominators."""
    n, T = panel.n, panel.T
    qq = n - 1 if q is None else q
    nu_all = [nu_matrix(X, r, t) for t in range(T)]
    total = 0.0
    for t in range(T):
        for i in range(n):
            ordering = [0] * (n - 1)
            for j in range(n):
                if j != i:
                    ordering[panel.y[t, i, j] - 1] = j
            for k in range(qq):
                denom = sum(nu_all[t][i, ordering[m]] for m in range(k, n - 1))
                total += math.log(nu_all[t][i, ordering[k]] / denom)
    return total


def ordering_to_rank_row(ordering: tuple[int, ...], i: int, n: int) -> np.ndarray:
    row = np.zeros(n, dtype=np.int64)
    for rank, j in enumerate(ordering, start=1):
        row[j] = rank
    row[i] = 0
    return row
