"""NumPy fallback for the hot numeric kernels.

Implements the same contract as the compiled extension ``_fast``:

* ``k1_scalar`` / ``k1_array`` -- modified Bessel function K1,
* ``readout_sums``            -- cos/sin moments of a number distribution
                                 over a grid of interaction strengths,
* ``cosine_filter_diag`` / ``cosine_filter_matrix`` -- the measurement
                                 filters cos^2(phi*n - theta), sin^2(...).

Both backends use identical algorithms (same branch point, same iteration
counts) so their outputs agree to floating-point rounding.
"""

import numpy as np

NAME = "pure"

_EULER_GAMMA = 0.5772156649015329

# Chebyshev fit of e^x sqrt(x) K1(x) on x in [2, inf), variable t = 4/x - 1.
# Max relative error of the fit: < 2e-15 (checked against 40-digit arithmetic).
_K1_CHEB = np.array([
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
])

_SERIES_TERMS = 20


def _k1_small(x):
    # Ascending series, converged to machine precision for x < 2:
    #   K1(x) = 1/x + ln(x/2) I1(x) - (x/4) sum_k [psi(k+1)+psi(k+2)] t_k
    # with t_k = (x^2/4)^k / (k! (k+1)!) and I1(x) = (x/2) sum_k t_k.
    q = 0.25 * x * x
    t = 1.0
    psi1 = -_EULER_GAMMA
    psi2 = 1.0 - _EULER_GAMMA
    s_i1 = t
    s_k = (psi1 + psi2) * t
    for k in range(1, _SERIES_TERMS):
        t *= q / (k * (k + 1))
        psi1 += 1.0 / k
        psi2 += 1.0 / (k + 1)
        s_i1 += t
        s_k += (psi1 + psi2) * t
    i1 = 0.5 * x * s_i1
    return 1.0 / x + np.log(0.5 * x) * i1 - 0.25 * x * s_k


def _k1_large(x):
    # Clenshaw evaluation of the Chebyshev fit; exp(-x) underflows to 0
    # for x beyond ~746, which is the intended behaviour.
    t = 4.0 / x - 1.0
    b0 = 0.0
    b1 = 0.0
    for c in _K1_CHEB[::-1]:
        b0, b1 = 2.0 * t * b0 - b1 + c, b0
    g = b0 - t * b1  # = sum_k c_k T_k(t)
    return g * np.exp(-x) / np.sqrt(x)


def k1_scalar(x):
    """K1(x) for a single x > 0 (caller validates the domain)."""
    if x < 2.0:
        return float(_k1_small(x))
    return float(_k1_large(x))


def k1_array(xs):
    """Elementwise K1 over a 1-D array of positive arguments."""
    xs = np.asarray(xs, dtype=float)
    return np.array([k1_scalar(x) for x in xs])


def readout_sums(weights, phis):
    """z[k] = sum_n w[n] cos(2 phi_k n), y[k] = sum_n w[n] sin(2 phi_k n)."""
    weights = np.asarray(weights, dtype=float)
    phis = np.asarray(phis, dtype=float)
    n = np.arange(weights.size)
    arg = 2.0 * np.outer(phis, n)
    z = np.cos(arg) @ weights
    y = np.sin(arg) @ weights
    return z, y


def cosine_filter_diag(weights, phi, theta):
    """Unnormalized branch weights after a conditioned interaction.

    Returns ``(p_down, p_up, w_down, w_up)`` where
    ``w_down[n] = cos^2(phi*n - theta) * weights[n]`` (``sin^2`` for the
    up branch) and ``p_down``/``p_up`` are their sums.
    """
    weights = np.asarray(weights, dtype=float)
    n = np.arange(weights.size)
    c = np.cos(phi * n - theta)
    s = np.sin(phi * n - theta)
    w_down = c * c * weights
    w_up = s * s * weights
    return float(w_down.sum()), float(w_up.sum()), w_down, w_up


def cosine_filter_matrix(rho, phi, theta):
    """Matrix version: rho_down[n,m] = c_n c_m rho[n,m], unnormalized.

    Returns ``(p_down, p_up, rho_down, rho_up)`` with the probabilities
    taken from the (real part of the) filtered diagonals.
    """
    rho = np.asarray(rho, dtype=complex)
    n = np.arange(rho.shape[0])
    c = np.cos(phi * n - theta)
    s = np.sin(phi * n - theta)
    rho_down = np.outer(c, c) * rho
    rho_up = np.outer(s, s) * rho
    p_down = float(np.real(np.trace(rho_down)))
    p_up = float(np.real(np.trace(rho_up)))
    return p_down, p_up, rho_down, rho_up
