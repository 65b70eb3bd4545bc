# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: K1, readout sums, and measurement cosine filters.

Mirrors ``pure.py`` exactly (same branch point, same iteration counts);
see that module for the algorithm notes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, log, sin, sqrt

cnp.import_array()

NAME = "cython"

cdef double EULER_GAMMA = 0.5772156649015329

cdef int N_CHEB = 23
cdef double[23] K1_CHEB
K1_CHEB[:] = [
    1.3603130952422215,
    0.10392373657681728,
    -0.002857816859622708,
    0.00019521551847144134,
    -1.9361979741538434e-05,
    2.406484947953847e-06,
    -3.501960602673609e-07,
    5.741084140503163e-08,
    -1.0345762417595122e-08,
    2.0150498735921323e-09,
    -4.190354661855158e-10,
    9.21832540602745e-11,
    -2.129960800207746e-11,
    5.139836873064249e-12,
    -1.2891260934563896e-12,
    3.3495145159962163e-13,
    -8.970712100138493e-14,
    2.4871748031662936e-14,
    -6.975687228396942e-15,
    2.0967114404654503e-15,
    -5.923532777015374e-16,
    1.8456621939580364e-16,
    -2.873195127045459e-17,
]

cdef int SERIES_TERMS = 20


cdef double _k1(double x) nogil:
    cdef double q, t, psi1, psi2, s_i1, s_k, i1
    cdef double tt, b0, b1, tmp, g
    cdef int k
    if x < 2.0:
        q = 0.25 * x * x
        t = 1.0
        psi1 = -EULER_GAMMA
        psi2 = 1.0 - EULER_GAMMA
        s_i1 = t
        s_k = (psi1 + psi2) * t
        for k in range(1, SERIES_TERMS):
            t *= q / (k * (k + 1))
            psi1 += 1.0 / k
            psi2 += 1.0 / (k + 1)
            s_i1 += t
            s_k += (psi1 + psi2) * t
        i1 = 0.5 * x * s_i1
        return 1.0 / x + log(0.5 * x) * i1 - 0.25 * x * s_k
    tt = 4.0 / x - 1.0
    b0 = 0.0
    b1 = 0.0
    for k in range(N_CHEB - 1, -1, -1):
        tmp = 2.0 * tt * b0 - b1 + K1_CHEB[k]
        b1 = b0
        b0 = tmp
    g = b0 - tt * b1
    return g * exp(-x) / sqrt(x)


def k1_scalar(double x):
    """K1(x) for a single x > 0 (caller validates the domain)."""
    return _k1(x)


def k1_array(xs):
    """Elementwise K1 over a 1-D array of positive arguments."""
    cdef const double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    out = np.empty(xv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    for i in range(xv.shape[0]):
        ov[i] = _k1(xv[i])
    return out


def readout_sums(weights, phis):
    """z[k] = sum_n w[n] cos(2 phi_k n), y[k] = sum_n w[n] sin(2 phi_k n)."""
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] p = np.ascontiguousarray(phis, dtype=np.float64)
    z = np.empty(p.shape[0])
    y = np.empty(p.shape[0])
    cdef double[::1] zv = z
    cdef double[::1] yv = y
    cdef Py_ssize_t k, n
    cdef double acc_z, acc_y, arg, two_phi
    for k in range(p.shape[0]):
        two_phi = 2.0 * p[k]
        acc_z = 0.0
        acc_y = 0.0
        for n in range(w.shape[0]):
            arg = two_phi * n
            acc_z += w[n] * cos(arg)
            acc_y += w[n] * sin(arg)
        zv[k] = acc_z
        yv[k] = acc_y
    return z, y


def cosine_filter_diag(weights, double phi, double theta):
    """Unnormalized branch weights after a conditioned interaction."""
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n
    w_down = np.empty(w.shape[0])
    w_up = np.empty(w.shape[0])
    cdef double[::1] dv = w_down
    cdef double[::1] uv = w_up
    cdef double c, s, p_down = 0.0, p_up = 0.0
    for n in range(w.shape[0]):
        c = cos(phi * n - theta)
        s = sin(phi * n - theta)
        dv[n] = c * c * w[n]
        uv[n] = s * s * w[n]
        p_down += dv[n]
        p_up += uv[n]
    return p_down, p_up, w_down, w_up


def cosine_filter_matrix(rho, double phi, double theta):
    """Matrix version: rho_down[n,m] = c_n c_m rho[n,m], unnormalized."""
    cdef const double complex[:, ::1] r = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef Py_ssize_t dim = r.shape[0]
    cdef Py_ssize_t n, m
    c_arr = np.empty(dim)
    s_arr = np.empty(dim)
    cdef double[::1] c = c_arr
    cdef double[::1] s = s_arr
    for n in range(dim):
        c[n] = cos(phi * n - theta)
        s[n] = sin(phi * n - theta)
    rho_down = np.empty((dim, dim), dtype=np.complex128)
    rho_up = np.empty((dim, dim), dtype=np.complex128)
    cdef double complex[:, ::1] rd = rho_down
    cdef double complex[:, ::1] ru = rho_up
    cdef double p_down = 0.0, p_up = 0.0
    for n in range(dim):
        for m in range(dim):
            rd[n, m] = c[n] * c[m] * r[n, m]
            ru[n, m] = s[n] * s[m] * r[n, m]
        p_down += rd[n, n].real
        p_up += ru[n, n].real
    return p_down, p_up, rho_down, rho_up
