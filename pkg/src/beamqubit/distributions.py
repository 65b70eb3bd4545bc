"""Photon / electron number distributions on a truncated Fock ladder.

Everything downstream (scattering, readout, reconstruction) consumes a
``NumberDistribution``: a finite weight vector p(0..n_max) together with
the probability mass that truncation discarded. Weights are kept
normalized over the truncated ladder so expectation values computed from
them are exact for the truncated state.
"""

import json
import math

import numpy as np

__all__ = [
    "NumberDistribution",
    "fock",
    "poisson",
    "thermal_bsv_proxy",
    "from_weights",
    "kl_divergence",
    "load_distribution",
    "save_distribution",
]

# Mass a truncated analytic distribution may discard before we refuse to
# build it silently.
DEFAULT_TRUNCATION_TOL = 1e-9


class NumberDistribution:
    """Normalized weights over number states 0..n_max (read-only).

    truncation_mass records how much probability the analytic parent
    distribution (if any) carried beyond n_max before renormalization;
    exact finite distributions report 0.
    """

    __slots__ = ("_weights", "_truncation_mass")

    def __init__(self, weights, truncation_mass=0.0):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0.0):
            raise ValueError("weights must be non-negative")
        total = float(w.sum())
        if total <= 0.0:
            raise ValueError("weights must have positive total mass")
        if not (0.0 <= truncation_mass < 1.0):
            raise ValueError(f"truncation_mass must be in [0, 1), got {truncation_mass}")
        w = w / total
        w.flags.writeable = False
        self._weights = w
        self._truncation_mass = float(truncation_mass)

    @property
    def weights(self):
        """Normalized weight vector, length n_max + 1. Read-only view."""
        return self._weights

    @property
    def truncation_mass(self):
        return self._truncation_mass

    @property
    def n_max(self):
        return self._weights.size - 1

    def __len__(self):
        return self._weights.size

    def __repr__(self):
        return (
            f"NumberDistribution(n_max={self.n_max}, mean={self.mean():.6g}, "
            f"truncation_mass={self._truncation_mass:.3g})"
        )

    def mean(self):
        n = np.arange(self._weights.size)
        return float(n @ self._weights)

    def variance(self):
        n = np.arange(self._weights.size)
        mu = float(n @ self._weights)
        return float((n - mu) ** 2 @ self._weights)

    def fano(self):
        """Variance-to-mean ratio. Undefined (raises) for zero mean."""
        mu = self.mean()
        if mu == 0.0:
            raise ValueError("Fano factor undefined for zero-mean distribution")
        return self.variance() / mu


def fock(n, n_max=None):
    """Point mass at number state n. Default ladder ends exactly at n."""
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n_max is None:
        n_max = n
    n_max = int(n_max)
    if n_max < n:
        raise ValueError(f"n_max={n_max} cannot be below n={n}")
    w = np.zeros(n_max + 1)
    w[n] = 1.0
    return NumberDistribution(w)


def poisson(mean, n_max, truncation_tol=DEFAULT_TRUNCATION_TOL):
    """Poisson(mean) truncated to 0..n_max.

    Weights are built in log space (lgamma) so large means stay
    well-conditioned. Raises when the discarded tail exceeds
    ``truncation_tol``; pass a larger tolerance to truncate aggressively
    on purpose.
    """
    mean = float(mean)
    n_max = int(n_max)
    if not (mean >= 0.0 and math.isfinite(mean)):
        raise ValueError(f"mean must be >= 0 and finite, got {mean}")
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    if mean == 0.0:
        return fock(0, n_max)
    n = np.arange(n_max + 1)
    log_w = n * math.log(mean) - mean - np.array([math.lgamma(k + 1.0) for k in n])
    w = np.exp(log_w)
    kept = float(w.sum())
    tail = max(0.0, 1.0 - kept)
    if tail > truncation_tol:
        raise ValueError(
            f"poisson(mean={mean}) loses {tail:.3g} probability beyond "
            f"n_max={n_max}, above tolerance {truncation_tol:.3g}"
        )
    return NumberDistribution(w, truncation_mass=tail)


def thermal_bsv_proxy(mean, n_max, truncation_tol=DEFAULT_TRUNCATION_TOL):
    """Geometric number distribution p(n) = (1-s) s^n, s = mean/(1+mean).

    Single-mode thermal statistics; also the standard stand-in for the
    photon-number spread of bright squeezed vacuum when only the
    super-Poissonian character (Fano = 1 + mean) matters. The tail mass
    beyond n_max is s^(n_max+1), available in closed form.
    """
    mean = float(mean)
    n_max = int(n_max)
    if not (mean >= 0.0 and math.isfinite(mean)):
        raise ValueError(f"mean must be >= 0 and finite, got {mean}")
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    if mean == 0.0:
        return fock(0, n_max)
    s = mean / (1.0 + mean)
    n = np.arange(n_max + 1)
    w = (1.0 - s) * s**n
    tail = s ** (n_max + 1)
    if tail > truncation_tol:
        raise ValueError(
            f"thermal_bsv_proxy(mean={mean}) loses {tail:.3g} probability "
            f"beyond n_max={n_max}, above tolerance {truncation_tol:.3g}"
        )
    return NumberDistribution(w, truncation_mass=tail)


def from_weights(weights, truncation_mass=0.0):
    """Wrap an arbitrary non-negative weight vector (renormalizing)."""
    return NumberDistribution(weights, truncation_mass=truncation_mass)


def floored(dist, floor=1e-12):
    """Copy of ``dist`` with every weight lifted to at least ``floor``.

    Estimators that enforce non-negativity tend to return exact zeros on
    rungs where the truth is merely tiny, which makes KL(p || estimate)
    +inf no matter how good the fit is. Flooring the estimate before
    the comparison turns that flag into a large-but-finite penalty, so
    fits of different quality stay comparable.
    """
    if not floor > 0.0:
        raise ValueError(f"floor must be positive, got {floor}")
    w = dist.weights if isinstance(dist, NumberDistribution) else np.asarray(dist)
    return NumberDistribution(np.maximum(w, floor))


def kl_divergence(p, q):
    """KL(p || q) in nats over a common ladder.

    Conventions: terms with p(n) = 0 contribute 0; any n with p(n) > 0
    but q(n) = 0 makes the divergence +inf. The two distributions must
    share n_max. Compare against ``floored(q)`` when q comes from a
    solver that returns exact zeros.
    """
    pw = p.weights if isinstance(p, NumberDistribution) else np.asarray(p, dtype=float)
    qw = q.weights if isinstance(q, NumberDistribution) else np.asarray(q, dtype=float)
    if pw.shape != qw.shape:
        raise ValueError(f"shape mismatch: {pw.shape} vs {qw.shape}")
    support = pw > 0.0
    if np.any(qw[support] == 0.0):
        return math.inf
    # log difference rather than log of quotient: p/q overflows for
    # subnormal q long before the divergence itself does
    return float(np.sum(pw[support] * (np.log(pw[support]) - np.log(qw[support]))))


def save_distribution(dist, path, fmt=None):
    """Write a distribution to ``path``.

    fmt='txt': one weight per line (portable, diff-friendly).
    fmt='json': {"n_max": ..., "weights": [...], "truncation_mass": ...}.
    Default: inferred from the suffix, falling back to text.
    """
    path = str(path)
    if fmt is None:
        fmt = "json" if path.endswith(".json") else "txt"
    if fmt == "txt":
        with open(path, "w") as fh:
            for w in dist.weights:
                fh.write(repr(float(w)) + "\n")
    elif fmt == "json":
        payload = {
            "n_max": dist.n_max,
            "truncation_mass": dist.truncation_mass,
            "weights": [float(w) for w in dist.weights],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}, expected 'txt' or 'json'")


def load_distribution(path):
    """Read a distribution written by save_distribution (either format)."""
    path = str(path)
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        payload = json.loads(text)
        weights = payload["weights"]
        n_max = payload.get("n_max")
        if n_max is not None and int(n_max) != len(weights) - 1:
            raise ValueError(
                f"n_max={n_max} inconsistent with {len(weights)} weights"
            )
        return NumberDistribution(
            weights, truncation_mass=float(payload.get("truncation_mass", 0.0))
        )
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"no weights found in {path}")
    return NumberDistribution([float(ln) for ln in lines])
