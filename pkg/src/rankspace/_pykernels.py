"""Pure-numpy likelihood kernels (fallback for the compiled extension).

Same API as ``rankspace._ckernels``.  All row computations run in the log
domain with suffix log-sum-exp scans.
"""

from __future__ import annotations

import numpy as np


def slice_distances(Xt: np.ndarray) -> np.ndarray:
    """Full pairwise distance matrix for one time slice, (n, p) -> (n, n)."""
    diff = Xt[:, None, :] - Xt[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def ordered_loglik(u: np.ndarray, q: int) -> float:
    """Sequential-choice log-likelihood from utilities in rank order.

    ``u[j]`` is the log-weight of the item ranked j+1; only the first
    ``q`` choice factors are summed.
    """
    s = np.logaddexp.accumulate(u[::-1])[::-1]
    return float(np.sum(u[:q] - s[:q]))


def slice_loglik(D, log_r, orders_t, q, rows_out=None) -> float:
    """Sum of row log-likelihoods at one time slice from its distance matrix.

    Parameters
    ----------
    D : (n, n) distances at time t.
    log_r : (n,) log reaches.
    orders_t : (n, n-1) int64, row orderings (0-based actor indices).
    q : number of leading choice factors per row.
    rows_out : optional (n,) output buffer for the per-row values.
    """
    U = log_r[orders_t] - np.take_along_axis(D, orders_t, axis=1)
    S = np.logaddexp.accumulate(U[:, ::-1], axis=1)[:, ::-1]
    rows = np.sum(U[:, :q] - S[:, :q], axis=1)
    if rows_out is not None:
        rows_out[:] = rows
    return float(rows.sum())


def panel_loglik(X, log_r, orders, q, rows_out=None) -> float:
    """Total log-likelihood over all time slices; optionally fills (T, n) rows."""
    total = 0.0
    for t in range(X.shape[0]):
        D = slice_distances(X[t])
        out = None if rows_out is None else rows_out[t]
        total += slice_loglik(D, log_r, orders[t], q, out)
    return total


def latent_sweep(X, D, row_ll, log_r, orders, tau_link, q, scale,
                 normals, unifs, use_obs=True):
    """One Metropolis sweep over all latent positions, t outer, i inner.

    Mutates ``X``, the per-slice distance cache ``D`` (T, n, n) and the
    row log-likelihood cache ``row_ll`` (T, n) in place.  ``tau_link[t]``
    is the precision of the Gaussian link *into* slice t (tau_0 for t=0,
    tau_{t+1} otherwise).  ``normals`` (T, n, p) and ``unifs`` (T, n) are
    the pre-drawn proposal variates, so the accept/reject stream is
    identical across backends.

    Returns (accepted count, non-finite-ratio count).
    """
    T, n, p = X.shape
    accepts = 0
    nonfinite = 0
    for t in range(T):
        Dt = D[t]
        ot = orders[t]
        for i in range(n):
            x_old = X[t, i].copy()
            xp = x_old + scale * normals[t, i]
            diff = X[t] - xp
            dnew = np.sqrt(np.einsum("jk,jk->j", diff, diff))
            dnew[i] = 0.0

            if use_obs:
                Dprop = Dt.copy()
                Dprop[i, :] = dnew
                Dprop[:, i] = dnew
                U = log_r[ot] - np.take_along_axis(Dprop, ot, axis=1)
                S = np.logaddexp.accumulate(U[:, ::-1], axis=1)[:, ::-1]
                new_rows = np.sum(U[:, :q] - S[:, :q], axis=1)
                log_ratio = float(new_rows.sum() - row_ll[t].sum())
            else:
                new_rows = None
                log_ratio = 0.0

            m_in = X[t - 1, i] if t > 0 else np.zeros(p)
            log_ratio -= 0.5 * tau_link[t] * (
                float(np.sum((xp - m_in) ** 2)) - float(np.sum((x_old - m_in) ** 2))
            )
            if t < T - 1:
                x_next = X[t + 1, i]
                log_ratio -= 0.5 * tau_link[t + 1] * (
                    float(np.sum((x_next - xp) ** 2)) - float(np.sum((x_next - x_old) ** 2))
                )

            if not np.isfinite(log_ratio):
                nonfinite += 1
                continue
            if np.log(unifs[t, i]) < log_ratio:
                X[t, i] = xp
                Dt[i, :] = dnew
                Dt[:, i] = dnew
                if use_obs:
                    row_ll[t] = new_rows
                accepts += 1
    return accepts, nonfinite
