"""Non-negative least squares by the Lawson-Hanson active-set method.

Solves min ||A x - b||_2 subject to x >= 0. This is the workhorse
behind number-distribution recovery from band-limited readout data,
where the non-negativity constraint is what makes the ill-conditioned
inversion meaningful. Kept dependency-free on purpose: the recovery
route must stay independently checkable against a second solver in the
test suite.
"""

from typing import NamedTuple

import numpy as np

__all__ = ["NNLSResult", "nnls"]


class NNLSResult(NamedTuple):
    x: np.ndarray
    rnorm: float
    converged: bool
    iterations: int


def nnls(a, b, maxiter=None, tol=1e-12):
    """Lawson-Hanson NNLS.

    Parameters
    ----------
    a, b : the design matrix (m, n) and target (m,).
    maxiter : cap on outer iterations (column insertions); default 10*n.
    tol : stationarity threshold on the dual vector w = A^T (b - A x);
        the solve is converged when no inactive coordinate has w > tol.

    Returns NNLSResult(x, rnorm, converged, iterations). ``converged``
    is False only when maxiter was exhausted; x is then the best
    feasible iterate found.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"a must be 2-d, got shape {a.shape}")
    m, n = a.shape
    if b.shape != (m,):
        raise ValueError(f"b must have shape ({m},), got {b.shape}")
    if maxiter is None:
        maxiter = 10 * n

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = a.T @ b  # dual at x = 0
    iterations = 0
    converged = False

    while iterations < maxiter:
        candidates = np.where(passive, -np.inf, w)
        j = int(np.argmax(candidates))
        if candidates[j] <= tol:
            converged = True
            break
        iterations += 1
        passive[j] = True

        # Inner loop: restore feasibility of the unconstrained solution
        # on the passive set, shrinking the set until it holds.
        while True:
            cols = np.flatnonzero(passive)
            z, *_ = np.linalg.lstsq(a[:, cols], b, rcond=None)
            if np.all(z > 0.0):
                x.fill(0.0)
                x[cols] = z
                break
            xc = x[cols]
            bad = z <= 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = xc[bad] / (xc[bad] - z[bad])
            alpha = float(np.min(steps))
            x.fill(0.0)
            x[cols] = np.maximum(xc + alpha * (z - xc), 0.0)
            drop = cols[x[cols] <= 0.0]
            x[drop] = 0.0
            passive[drop] = False
            if not np.any(passive):
                break

        w = a.T @ (b - a @ x)

    rnorm = float(np.linalg.norm(b - a @ x))
    return NNLSResult(x=x, rnorm=rnorm, converged=converged, iterations=iterations)
