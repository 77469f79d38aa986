# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled likelihood kernels: suffix log-sum-exp rows and the latent sweep.

Same API as ``rankspace._pykernels``; see that module for documentation.
"""

from libc.math cimport INFINITY, exp, isfinite, log, log1p, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline double _logaddexp(double a, double b) noexcept nogil:
    if a == -INFINITY:
        return b
    if b == -INFINITY:
        return a
    if a > b:
        return a + log1p(exp(b - a))
    return b + log1p(exp(a - b))


cdef inline double _row_ll(const double[:, ::1] D, const double[::1] log_r,
                           const cnp.int64_t[:, ::1] orders_t,
                           Py_ssize_t k, Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t m = orders_t.shape[1]
    cdef Py_ssize_t j, o
    cdef double u, s = -INFINITY, ll = 0.0
    for j in range(m - 1, -1, -1):
        o = orders_t[k, j]
        u = log_r[o] - D[k, o]
        s = _logaddexp(u, s)
        if j < q:
            ll += u - s
    return ll


cdef inline double _row_ll_prop(const double[:, ::1] D, const double[::1] dnew,
                                Py_ssize_t i, const double[::1] log_r,
                                const cnp.int64_t[:, ::1] orders_t,
                                Py_ssize_t k, Py_ssize_t q) noexcept nogil:
    # Row k with row/column i of D replaced by the proposal distances.
    cdef Py_ssize_t m = orders_t.shape[1]
    cdef Py_ssize_t j, o
    cdef double u, d, s = -INFINITY, ll = 0.0
    for j in range(m - 1, -1, -1):
        o = orders_t[k, j]
        if k == i:
            d = dnew[o]
        elif o == i:
            d = dnew[k]
        else:
            d = D[k, o]
        u = log_r[o] - d
        s = _logaddexp(u, s)
        if j < q:
            ll += u - s
    return ll


def ordered_loglik(const double[::1] u, Py_ssize_t q):
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t j
    cdef double s = -INFINITY, ll = 0.0
    for j in range(m - 1, -1, -1):
        s = _logaddexp(u[j], s)
        if j < q:
            ll += u[j] - s
    return ll


def slice_loglik(const double[:, ::1] D, const double[::1] log_r,
                 const cnp.int64_t[:, ::1] orders_t, Py_ssize_t q,
                 rows_out=None):
    cdef Py_ssize_t n = orders_t.shape[0]
    cdef Py_ssize_t k
    cdef double total = 0.0, ll
    cdef double[::1] out
    if rows_out is None:
        with nogil:
            for k in range(n):
                total += _row_ll(D, log_r, orders_t, k, q)
    else:
        out = rows_out
        with nogil:
            for k in range(n):
                ll = _row_ll(D, log_r, orders_t, k, q)
                out[k] = ll
                total += ll
    return total


def panel_loglik(const double[:, :, ::1] X, const double[::1] log_r,
                 const cnp.int64_t[:, :, ::1] orders, Py_ssize_t q,
                 rows_out=None):
    cdef Py_ssize_t T = X.shape[0]
    cdef Py_ssize_t n = X.shape[1]
    cdef Py_ssize_t p = X.shape[2]
    cdef Py_ssize_t t, i, j, c
    cdef double total = 0.0, acc, diff, ll
    D_arr = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] D = D_arr
    cdef double[:, ::1] out
    cdef bint want_rows = rows_out is not None
    if want_rows:
        out = rows_out.reshape(T, n)
    with nogil:
        for t in range(T):
            for i in range(n):
                D[i, i] = 0.0
                for j in range(i + 1, n):
                    acc = 0.0
                    for c in range(p):
                        diff = X[t, i, c] - X[t, j, c]
                        acc += diff * diff
                    acc = sqrt(acc)
                    D[i, j] = acc
                    D[j, i] = acc
            for i in range(n):
                ll = _row_ll(D, log_r, orders[t], i, q)
                if want_rows:
                    out[t, i] = ll
                total += ll
    return total


def latent_sweep(double[:, :, ::1] X, double[:, :, ::1] D, double[:, ::1] row_ll,
                 const double[::1] log_r, const cnp.int64_t[:, :, ::1] orders,
                 const double[::1] tau_link, Py_ssize_t q, double scale,
                 const double[:, :, ::1] normals, const double[:, ::1] unifs,
                 bint use_obs=True):
    cdef Py_ssize_t T = X.shape[0]
    cdef Py_ssize_t n = X.shape[1]
    cdef Py_ssize_t p = X.shape[2]
    cdef Py_ssize_t t, i, j, c, k
    cdef long accepts = 0, nonfinite = 0
    cdef double acc, diff, log_ratio, obs_new, obs_old, quad_new, quad_old, ll

    xp_arr = np.empty(p, dtype=np.float64)
    dnew_arr = np.empty(n, dtype=np.float64)
    rows_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] xp = xp_arr
    cdef double[::1] dnew = dnew_arr
    cdef double[::1] new_rows = rows_arr

    with nogil:
        for t in range(T):
            for i in range(n):
                for c in range(p):
                    xp[c] = X[t, i, c] + scale * normals[t, i, c]
                for j in range(n):
                    if j == i:
                        dnew[j] = 0.0
                        continue
                    acc = 0.0
                    for c in range(p):
                        diff = X[t, j, c] - xp[c]
                        acc += diff * diff
                    dnew[j] = sqrt(acc)

                if use_obs:
                    obs_new = 0.0
                    obs_old = 0.0
                    for k in range(n):
                        ll = _row_ll_prop(D[t], dnew, i, log_r, orders[t], k, q)
                        new_rows[k] = ll
                        obs_new += ll
                        obs_old += row_ll[t, k]
                    log_ratio = obs_new - obs_old
                else:
                    log_ratio = 0.0

                # Gaussian link into slice t (origin prior when t == 0).
                quad_new = 0.0
                quad_old = 0.0
                if t > 0:
                    for c in range(p):
                        diff = xp[c] - X[t - 1, i, c]
                        quad_new += diff * diff
                        diff = X[t, i, c] - X[t - 1, i, c]
                        quad_old += diff * diff
                else:
                    for c in range(p):
                        quad_new += xp[c] * xp[c]
                        quad_old += X[t, i, c] * X[t, i, c]
                log_ratio -= 0.5 * tau_link[t] * (quad_new - quad_old)
                # Link out of slice t.
                if t < T - 1:
                    quad_new = 0.0
                    quad_old = 0.0
                    for c in range(p):
                        diff = X[t + 1, i, c] - xp[c]
                        quad_new += diff * diff
                        diff = X[t + 1, i, c] - X[t, i, c]
                        quad_old += diff * diff
                    log_ratio -= 0.5 * tau_link[t + 1] * (quad_new - quad_old)

                if not isfinite(log_ratio):
                    nonfinite += 1
                    continue
                if log(unifs[t, i]) < log_ratio:
                    for c in range(p):
                        X[t, i, c] = xp[c]
                    for j in range(n):
                        D[t, i, j] = dnew[j]
                        D[t, j, i] = dnew[j]
                    if use_obs:
                        for k in range(n):
                            row_ll[t, k] = new_rows[k]
                    accepts += 1
    return accepts, nonfinite
