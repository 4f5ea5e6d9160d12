# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled moment kernels.

Fused single-pass accumulation of the discriminator-weighted score
moments and of their per-node partial derivatives with respect to the
noise-density values.  These two reductions dominate the runtime of
sweeps and of the conjugate-gradient histogram optimization.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def weighted_moments(double[::1] g, double[::1] pd, double[::1] pn,
                     double[::1] w, double nu):
    """Return (m, I) where

        m = sum_k w_k * g_k   * r_k * pd_k
        I = sum_k w_k * g_k^2 * r_k * pd_k

    with r_k = nu*pn_k / (pd_k + nu*pn_k) (0 where both densities
    vanish).  Kahan-compensated accumulation in a fixed order.
    """
    cdef Py_ssize_t k, n = g.shape[0]
    cdef double m = 0.0, cm = 0.0, i_ = 0.0, ci = 0.0
    cdef double denom, r, base, t, y
    for k in range(n):
        denom = pd[k] + nu * pn[k]
        if denom > 0.0:
            r = nu * pn[k] / denom
        else:
            r = 0.0
        base = w[k] * r * pd[k]
        y = g[k] * base - cm
        t = m + y
        cm = (t - m) - y
        m = t
        y = g[k] * g[k] * base - ci
        t = i_ + y
        ci = (t - i_) - y
        i_ = t
    return m, i_


def moment_partials(double[::1] g, double[::1] pd, double[::1] pn,
                    double[::1] w, double nu):
    """Per-node partial derivatives of (m, I) w.r.t. the noise density
    values pn_k:

        dm_k = w_k * g_k   * pd_k * nu*pd_k / (pd_k + nu*pn_k)^2
        dI_k = w_k * g_k^2 * pd_k * nu*pd_k / (pd_k + nu*pn_k)^2
    """
    cdef Py_ssize_t k, n = g.shape[0]
    dm_arr = np.empty(n)
    di_arr = np.empty(n)
    cdef double[::1] dm = dm_arr
    cdef double[::1] di = di_arr
    cdef double denom, c
    for k in range(n):
        denom = pd[k] + nu * pn[k]
        if denom > 0.0:
            c = w[k] * pd[k] * nu * pd[k] / (denom * denom)
        else:
            c = 0.0
        dm[k] = g[k] * c
        di[k] = g[k] * g[k] * c
    return dm_arr, di_arr
