"""Domain types and the ranked-network likelihood.

A rank panel holds T observed n-by-n rank matrices: row i of matrix t is
actor i's ranking of the other n-1 actors (1 = most favored, 0 on the
diagonal).  Each actor's row likelihood is a sequential-choice
(Plackett-Luce) probability with weights

    nu_ij = r_j * exp(-||X_i - X_j||),

so favorable rankings come from large social reach r_j and small latent
distance.  Ranks and actor labels are 1-based at the file/paper boundary;
everything in memory is 0-based (orderings hold 0-based actor indices).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backend import kernels


class PanelValidationError(ValueError):
    """Raised when observed rank data violates the panel invariants."""


class NumericalError(RuntimeError):
    """Raised when a computation produces non-finite intermediates."""


class ConfigurationError(ValueError):
    """Raised for inconsistent run configuration (shapes, ranges, paths)."""


def ordering_of(rank_row: np.ndarray, i: int) -> np.ndarray:
    """Invert one rank row into its ordering.

    Parameters
    ----------
    rank_row : (n,) int array
        Row i of a rank matrix: 0 at position i, the other entries a
        permutation of 1..n-1.
    i : int
        0-based index of the ranking actor.

    Returns
    -------
    (n-1,) int64 array whose j-th entry is the 0-based index of the actor
    that ``rank_row`` places at rank j+1.
    """
    row = np.asarray(rank_row)
    n = row.shape[0]
    _validate_rank_row(row, i, t=None)
    order = np.empty(n - 1, dtype=np.int64)
    for j in range(n):
        if j != i:
            order[row[j] - 1] = j
    return order


def _validate_rank_row(row: np.ndarray, i: int, t: int | None) -> None:
    where = f"(t={t + 1}, i={i + 1})" if t is not None else f"(i={i + 1})"
    n = row.shape[0]
    if row[i] != 0:
        raise PanelValidationError(
            f"rank row {where}: diagonal entry must be 0, got {row[i]}"
        )
    off = np.delete(row, i)
    if off.min(initial=n) < 1 or off.max(initial=0) > n - 1:
        raise PanelValidationError(
            f"rank row {where}: ranks must lie in 1..{n - 1}"
        )
    counts = np.bincount(off, minlength=n)
    dup = np.nonzero(counts[1:n] != 1)[0]
    if dup.size:
        raise PanelValidationError(
            f"rank row {where}: rank {dup[0] + 1} appears {counts[dup[0] + 1]} times; "
            f"row must be a permutation of 1..{n - 1}"
        )


@dataclass(frozen=True)
class RankPanel:
    """T observed n-by-n rank matrices.

    ``y[t, i, j]`` is the rank actor i gives actor j at time t (1 = most
    favored); ``y[t, i, i] = 0`` and each off-diagonal row is a permutation
    of 1..n-1.  Validation is eager: any panel that constructs is valid,
    and downstream code relies on that.
    """

    y: np.ndarray

    def __post_init__(self) -> None:
        y = np.asarray(self.y)
        if y.ndim != 3 or y.shape[1] != y.shape[2]:
            raise PanelValidationError(
                f"panel must have shape (T, n, n), got {y.shape}"
            )
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(y == np.round(y)):
                raise PanelValidationError("panel entries must be integers")
            y = y.astype(np.int64)
        T, n, _ = y.shape
        if n < 2 or T < 1:
            raise PanelValidationError(f"need n >= 2 and T >= 1, got n={n}, T={T}")
        for t in range(T):
            for i in range(n):
                _validate_rank_row(y[t, i], i, t)
        y = np.ascontiguousarray(y, dtype=np.int64)
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.shape[1]

    @property
    def T(self) -> int:
        return self.y.shape[0]

    def orderings(self) -> np.ndarray:
        """All row orderings as a (T, n, n-1) int64 tensor (0-based actors)."""
        T, n = self.T, self.n
        om = np.empty((T, n, n - 1), dtype=np.int64)
        actors = np.arange(n)
        for t in range(T):
            for i in range(n):
                row = self.y[t, i]
                mask = actors != i
                om[t, i, row[mask] - 1] = actors[mask]
        return om


def validate_trajectories(X: np.ndarray, n: int | None = None, T: int | None = None,
                          p: int | None = None) -> np.ndarray:
    """Check a (T, n, p) latent position array and return it as C-contiguous float64."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3:
        raise ConfigurationError(f"latent positions must be (T, n, p), got {X.shape}")
    if T is not None and X.shape[0] != T:
        raise ConfigurationError(f"latent T={X.shape[0]} does not match panel T={T}")
    if n is not None and X.shape[1] != n:
        raise ConfigurationError(f"latent n={X.shape[1]} does not match panel n={n}")
    if p is not None and X.shape[2] != p:
        raise ConfigurationError(f"latent p={X.shape[2]} does not match p={p}")
    if not np.all(np.isfinite(X)):
        raise NumericalError("latent positions contain non-finite entries")
    return np.ascontiguousarray(X)


@dataclass
class ModelParams:
    """Model parameters: reaches on the simplex, precisions, random-walk shape.

    ``tau`` holds the transition precisions for times 2..T (index 0 is
    tau_2).  ``tau0`` is the precision of the initial positions and
    ``tau1`` the hyperparameter scaling tau_2's prior mean.
    """

    r: np.ndarray
    tau0: float
    tau1: float
    tau: np.ndarray
    theta: float

    SIMPLEX_TOL = 1e-10

    def __post_init__(self) -> None:
        self.r = np.ascontiguousarray(self.r, dtype=np.float64)
        self.tau = np.ascontiguousarray(self.tau, dtype=np.float64)
        self.validate()

    def validate(self) -> None:
        if self.r.ndim != 1 or np.any(self.r <= 0):
            raise ConfigurationError("reaches must be a 1-d positive vector")
        if abs(float(self.r.sum()) - 1.0) > self.SIMPLEX_TOL:
            raise ConfigurationError(
                f"reaches must sum to 1 within {self.SIMPLEX_TOL}, got {self.r.sum()!r}"
            )
        for name, value in (("tau0", self.tau0), ("tau1", self.tau1), ("theta", self.theta)):
            if not np.isfinite(value) or value <= 0:
                raise ConfigurationError(f"{name} must be positive and finite, got {value}")
        if self.tau.ndim != 1 or np.any(~np.isfinite(self.tau)) or np.any(self.tau <= 0):
            raise ConfigurationError("transition precisions must be positive and finite")

    @property
    def eta(self) -> np.ndarray:
        """Precision ratios tau_t / tau_{t-1} for t = 2..T (tau_1 first)."""
        prev = np.concatenate(([self.tau1], self.tau[:-1]))
        return self.tau / prev

    def copy(self) -> "ModelParams":
        return ModelParams(self.r.copy(), self.tau0, self.tau1, self.tau.copy(), self.theta)


@dataclass
class Hyperparams:
    """Prior hyperparameters and MCMC controls.

    ``lambda0``, ``lambda1`` and ``mu`` default to None, meaning "derive
    from the data-driven initialization"; explicit values override that.
    ``alpha=None`` means the flat Dirichlet (all ones).
    """

    alpha: np.ndarray | None = None
    lambda0: float | None = None
    lambda1: float | None = None
    mu: float | None = None
    sigma2: float = 25.0
    kappa: float = 10_000.0
    step_latent: float = 0.1
    step_theta: float = 0.1
    iterations: int = 250_000
    burn_in: int = 50_000
    thin: int = 20
    seed: int = 0
    top_q: int | None = None

    def validate(self, n: int | None = None) -> None:
        if self.alpha is not None:
            a = np.asarray(self.alpha, dtype=np.float64)
            if a.ndim != 1 or np.any(a <= 0):
                raise ConfigurationError("alpha must be a positive vector")
            if n is not None and a.shape[0] != n:
                raise ConfigurationError(f"alpha has length {a.shape[0]}, expected {n}")
        for name in ("lambda0", "lambda1", "sigma2", "kappa", "step_latent", "step_theta"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ConfigurationError(f"{name} must be positive, got {value}")
        if self.iterations <= 0 or self.burn_in < 0 or self.thin <= 0:
            raise ConfigurationError("iterations, burn-in and thin must be positive")
        if self.burn_in >= self.iterations:
            raise ConfigurationError(
                f"burn-in ({self.burn_in}) must be smaller than iterations ({self.iterations})"
            )
        if self.top_q is not None and self.top_q < 1:
            raise ConfigurationError(f"top_q must be >= 1, got {self.top_q}")

    def resolved_alpha(self, n: int) -> np.ndarray:
        if self.alpha is None:
            return np.ones(n)
        return np.asarray(self.alpha, dtype=np.float64)


def distance(X: np.ndarray, t: int, i: int, j: int) -> float:
    """Euclidean distance between actors i and j at time t."""
    diff = np.asarray(X)[t, i] - np.asarray(X)[t, j]
    return float(np.sqrt(np.dot(diff, diff)))


def mean_utility(X: np.ndarray, r: np.ndarray, t: int, i: int, j: int) -> float:
    """Mean latent utility actor i assigns to j at time t: log(r_j) - d_ijt."""
    if i == j:
        raise ConfigurationError("mean utility is defined for i != j only")
    rj = float(np.asarray(r)[j])
    if rj <= 0:
        raise ConfigurationError(f"reach r[{j}] must be positive, got {rj}")
    return float(np.log(rj) - distance(X, t, i, j))


def _resolve_q(n: int, q: int | None) -> int:
    if q is None:
        return n - 1
    if not 1 <= q <= n - 1:
        raise ConfigurationError(f"q must lie in 1..{n - 1}, got {q}")
    return int(q)


def row_loglik(panel: RankPanel, X: np.ndarray, r: np.ndarray, t: int, i: int,
               q: int | None = None) -> float:
    """Log-probability of row (t, i) under the sequential-choice likelihood.

    Computed in the log domain with a suffix log-sum-exp scan, so far-away
    actors (large distances) cannot underflow the denominators.
    """
    qq = _resolve_q(panel.n, q)
    X = validate_trajectories(X, panel.n, panel.T)
    r = np.ascontiguousarray(r, dtype=np.float64)
    order = panel.orderings()[t, i]
    d = np.sqrt(np.sum((X[t, order] - X[t, i]) ** 2, axis=1))
    u = np.log(r[order]) - d
    value = kernels.ordered_loglik(np.ascontiguousarray(u), qq)
    if not np.isfinite(value):
        raise NumericalError(f"non-finite row log-likelihood at (t={t + 1}, i={i + 1})")
    return value


def row_loglik_topq(panel: RankPanel, X: np.ndarray, r: np.ndarray, t: int, i: int,
                    q: int) -> float:
    """First q factors of ``row_loglik``: the top-q partial-ranking likelihood."""
    return row_loglik(panel, X, r, t, i, q=q)


def total_loglik(panel: RankPanel, X: np.ndarray, r: np.ndarray,
                 q: int | None = None) -> float:
    """Sum of all row log-likelihoods (rows are conditionally independent)."""
    qq = _resolve_q(panel.n, q)
    X = validate_trajectories(X, panel.n, panel.T)
    r = np.ascontiguousarray(r, dtype=np.float64)
    log_r = np.log(r)
    value = kernels.panel_loglik(X, log_r, panel.orderings(), qq, None)
    if not np.isfinite(value):
        raise NumericalError("non-finite total log-likelihood")
    return value
