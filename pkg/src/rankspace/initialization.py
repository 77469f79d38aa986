"""Data-driven starting values for the sampler and the derived prior settings.

The pipeline is deterministic given the panel and latent dimension:

1. reaches from how favorably each actor is ranked overall,
2. per-time dissimilarities blending both directions of each pair,
3. classical (Torgerson) MDS per time slice,
4. sequential rigid alignment of slice t onto slice t-1,
5. a global scale chosen by maximizing the likelihood along one axis,
6. precisions from inverse mean squared displacements, plus the prior
   hyperparameters matched to those initial estimates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import NumericalError, RankPanel, total_loglik
from .procrustes import procrustes_align

PRECISION_CAP = 1e8


@dataclass
class InitResult:
    """Initial parameter estimates plus the hyperparameters derived from them."""

    r1: np.ndarray
    X1: np.ndarray
    c0: float
    tau0_1: float
    tau1_1: float
    tau_1: np.ndarray
    theta1: float
    lambda0: float
    lambda1: float
    mu: float
    notes: list[str] = field(default_factory=list)


def init_social_reach(panel: RankPanel) -> np.ndarray:
    """Initial reaches from received ranks; sums to exactly 1.

    r_i = sum_t sum_{j != i} 2 (n - y[t, j, i]) / (n^2 (n-1) T).  The j = i
    term is excluded: including the structural diagonal zeros would break
    the simplex normalization the model requires.
    """
    n, T = panel.n, panel.T
    received = np.zeros(n)
    for t in range(T):
        contrib = (n - panel.y[t]).astype(np.float64)
        np.fill_diagonal(contrib, 0.0)
        received += contrib.sum(axis=0)
    return 2.0 * received / (n * n * (n - 1) * T)


def build_dissimilarity(panel: RankPanel, r1: np.ndarray, t: int) -> np.ndarray:
    """Symmetric dissimilarities at time t from mutual ranks weighted by reach.

    d[i, j] = r1_j / (n - y[t, i, j]) + r1_i / (n - y[t, j, i]); the
    proportionality constant is fixed at 1 (any constant is absorbed by
    the likelihood scale search).
    """
    n = panel.n
    y = panel.y[t].astype(np.float64)
    with np.errstate(divide="ignore"):
        term = r1[None, :] / (n - y)
    np.fill_diagonal(term, 0.0)
    d = term + term.T
    np.fill_diagonal(d, 0.0)
    return d


def classical_mds(D: np.ndarray, p: int) -> np.ndarray:
    """Torgerson scaling of a dissimilarity matrix into p dimensions.

    Double-centers -D^2/2, keeps the top-p eigenpairs and clips negative
    eigenvalues at zero (the dissimilarities need not be Euclidean).
    The output is mean-centered.
    """
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[0]
    if D.shape != (n, n):
        raise ValueError(f"dissimilarity matrix must be square, got {D.shape}")
    J = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * J @ (D * D) @ J
    try:
        evals, evecs = np.linalg.eigh(B)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"eigendecomposition failed in MDS: {exc}") from exc
    idx = np.argsort(evals)[::-1][:p]
    lam = np.clip(evals[idx], 0.0, None)
    coords = evecs[:, idx] * np.sqrt(lam)
    return coords - coords.mean(axis=0)


def scale_search(panel: RankPanel, Xstar: np.ndarray, r1: np.ndarray,
                 q: int | None = None) -> tuple[float, np.ndarray]:
    """Find the scale c maximizing the likelihood of c * Xstar.

    Golden-section search on log10(c) over [-3, 3] to an interval width of
    1e-4.  A flat objective (all-zero configuration) returns c = 1 with a
    warning.
    """
    Xstar = np.asarray(Xstar, dtype=np.float64)
    if not np.any(Xstar):
        warnings.warn("all-zero configuration: likelihood is constant in the scale",
                      stacklevel=2)
        return 1.0, Xstar.copy()

    def objective(log_c: float) -> float:
        return total_loglik(panel, (10.0 ** log_c) * Xstar, r1, q=q)

    lo, hi = -3.0, 3.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a = hi - invphi * (hi - lo)
    b = lo + invphi * (hi - lo)
    fa, fb = objective(a), objective(b)
    while hi - lo > 1e-4:
        if fa < fb:
            lo, a, fa = a, b, fb
            b = lo + invphi * (hi - lo)
            fb = objective(b)
        else:
            hi, b, fb = b, a, fa
            a = hi - invphi * (hi - lo)
            fa = objective(a)
    c0 = 10.0 ** ((lo + hi) / 2.0)
    return c0, c0 * Xstar


def init_precisions(X1: np.ndarray) -> dict[str, object]:
    """Precision starting values and matched prior hyperparameters.

    tau estimates are inverse mean squared coordinates / displacements;
    theta is the inverse sample variance of consecutive precision ratios.
    Degenerate cases (zero displacement, too few ratios, zero ratio
    variance) are clamped with warnings and recorded in ``notes``.
    """
    X1 = np.asarray(X1, dtype=np.float64)
    T, n, p = X1.shape
    notes: list[str] = []

    def inverse_mean_square(ss: float, label: str) -> float:
        if ss <= 0.0:
            notes.append(f"{label}: zero displacement, precision clamped at {PRECISION_CAP:g}")
            warnings.warn(notes[-1], stacklevel=3)
            return PRECISION_CAP
        return 1.0 / (ss / (n * p))

    tau0_1 = inverse_mean_square(float(np.sum(X1[0] ** 2)), "tau0")
    tau_1 = np.empty(T - 1)
    for t in range(1, T):
        ss = float(np.sum((X1[t] - X1[t - 1]) ** 2))
        tau_1[t - 1] = inverse_mean_square(ss, f"tau_{t + 1}")
    tau1_1 = float(tau_1[0]) if T >= 2 else 1.0

    ratios = tau_1[1:] / tau_1[:-1]  # tau_t / tau_{t-1} for t >= 3
    if ratios.size < 2:
        theta1 = 1.0
        notes.append("fewer than two precision ratios: theta set to 1")
        warnings.warn(notes[-1], stacklevel=2)
    else:
        var = float(np.var(ratios, ddof=1))
        if var <= 0.0 or 1.0 / var >= PRECISION_CAP:
            theta1 = PRECISION_CAP
            notes.append(f"zero ratio variance: theta clamped at {PRECISION_CAP:g}")
            warnings.warn(notes[-1], stacklevel=2)
        else:
            theta1 = 1.0 / var

    return {
        "tau0_1": tau0_1,
        "tau1_1": tau1_1,
        "tau_1": tau_1,
        "theta1": theta1,
        "lambda0": 1.0 / tau0_1,
        "lambda1": 2.0 + 1.0 / tau1_1,
        "mu": math.log(theta1),
        "notes": notes,
    }


def initialize(panel: RankPanel, p: int = 2, q: int | None = None) -> InitResult:
    """Run the full initialization pipeline on a panel."""
    if panel.T < 2:
        raise ValueError("initialization needs at least two time points")
    r1 = init_social_reach(panel)
    slices = []
    for t in range(panel.T):
        coords = classical_mds(build_dissimilarity(panel, r1, t), p)
        if t > 0:
            coords = procrustes_align(coords, slices[-1])
        slices.append(coords)
    Xstar = np.stack(slices)
    c0, X1 = scale_search(panel, Xstar, r1, q=q)
    prec = init_precisions(X1)
    return InitResult(
        r1=r1,
        X1=X1,
        c0=c0,
        tau0_1=prec["tau0_1"],
        tau1_1=prec["tau1_1"],
        tau_1=prec["tau_1"],
        theta1=prec["theta1"],
        lambda0=prec["lambda0"],
        lambda1=prec["lambda1"],
        mu=prec["mu"],
        notes=prec["notes"],
    )
