"""Inverting characteristic samples back into number statistics."""

import math

import numpy as np
import pytest
from scipy import optimize

from beamqubit import (
    PhiGrid,
    characteristic_function,
    floored,
    fock,
    from_weights,
    kl_divergence,
    poisson,
    recover_exact,
    recover_limited,
)

from conftest import random_distribution


# -- exact (commensurate grid) path ------------------------------------------------


def test_exact_recovers_fock():
    d = fock(3, 7)
    samples = characteristic_function(d, PhiGrid.exact(7))
    result = recover_exact(samples)
    assert result.method == "fourier"
    assert np.allclose(result.distribution.weights, d.weights, atol=1e-14)
    assert result.residual <= 1e-14


def test_exact_constant_spectrum_is_vacuum():
    result = recover_exact(np.ones(9, dtype=complex))
    assert np.allclose(result.distribution.weights, fock(0, 8).weights, atol=1e-15)


def test_exact_round_trip_random(rng):
    for _ in range(20):
        d = random_distribution(rng, 63)
        rec = recover_exact(characteristic_function(d, PhiGrid.exact(63)), n_max=63)
        assert kl_divergence(d, rec.distribution) <= 1e-9


def test_exact_round_trip_poisson():
    # True Poisson tails sit far below double-precision transform noise,
    # so the non-negativity clip zeroes them and the strict divergence
    # against the raw estimate is +inf by convention. The weights
    # themselves come back at machine precision, and the floored
    # comparison shows the round trip at the 1e-9 level.
    d = poisson(5.0, 63)
    rec = recover_exact(characteristic_function(d, PhiGrid.exact(63)))
    assert np.max(np.abs(rec.distribution.weights - d.weights)) <= 1e-12
    assert kl_divergence(d, floored(rec.distribution)) <= 1e-9
    assert kl_divergence(rec.distribution, d) <= 1e-9
    assert rec.clipped_mass <= 1e-12


def test_exact_rejects_wrong_sample_count():
    with pytest.raises(ValueError):
        recover_exact(np.ones(5, dtype=complex), n_max=7)


def test_exact_rejects_off_grid_samples(rng):
    # characteristic values taken on the wrong grid leave an imaginary
    # residue in the inverse transform
    d = random_distribution(rng, 15)
    wrong = characteristic_function(d, PhiGrid.uniform(1.0, 16))
    with pytest.raises(ValueError, match="imaginary residue"):
        recover_exact(wrong)


def test_exact_reports_clipped_mass(rng):
    # Samples synthesized from a weight vector with one slightly
    # negative entry: the inversion reproduces it and the clip reports
    # exactly that mass.
    d = random_distribution(rng, 7)
    w = d.weights.copy()
    w[3] = -1e-7
    result = recover_exact(np.fft.fft(w))
    assert result.clipped_mass == pytest.approx(1e-7, rel=1e-6)
    assert result.distribution.weights.sum() == pytest.approx(1.0, abs=1e-12)


# -- limited (arbitrary grid) path ---------------------------------------------------


def test_limited_full_period_matches_exact(rng):
    d = random_distribution(rng, 23)
    grid = PhiGrid.uniform(math.pi, 24)
    limited = recover_limited(characteristic_function(d, grid), grid, 23)
    exact = recover_exact(characteristic_function(d, PhiGrid.exact(23)))
    assert limited.converged
    assert kl_divergence(exact.distribution, floored(limited.distribution)) <= 1e-6


def test_limited_two_point_distribution():
    # two unknowns, two samples past pi/2: exactly determined
    d = from_weights([0.5, 0.5])
    grid = PhiGrid.uniform(math.pi / 2, 2)
    result = recover_limited(characteristic_function(d, grid), grid, 1)
    assert kl_divergence(d, result.distribution) <= 1e-6


def test_limited_small_phi_max_poisson50():
    # Heavily under-resolved regime: phi_max = 0.01 cannot separate
    # neighbouring rungs, the estimate collapses onto a few spikes and
    # the divergence is large (about 21 nats on this configuration),
    # but the low moments of the truth survive.
    d = poisson(50.0, 127)
    grid = PhiGrid.uniform(0.01, 128)
    result = recover_limited(characteristic_function(d, grid), grid, 127)
    assert result.converged
    rec = result.distribution
    kl = kl_divergence(d, floored(rec))
    assert kl > 5.0
    assert rec.mean() == pytest.approx(d.mean(), rel=1e-2)
    assert rec.variance() == pytest.approx(d.variance(), rel=0.05)


def stacked_system(grid, samples, n_max):
    n = np.arange(n_max + 1)
    arg = 2.0 * np.outer(grid.values, n)
    a = np.vstack([np.cos(arg), -np.sin(arg)])
    b = np.concatenate([samples.real, samples.imag])
    return a, b


def test_limited_matches_scipy_nnls_well_conditioned(rng):
    # wide grid: the constrained problem has a unique solution, so the
    # two solvers must land on the same point
    d = random_distribution(rng, 20)
    grid = PhiGrid.uniform(3.0, 30)
    samples = characteristic_function(d, grid)
    result = recover_limited(samples, grid, 20)
    a, b = stacked_system(grid, samples, 20)
    x_ref, _ = optimize.nnls(a, b)
    assert np.max(np.abs(result.distribution.weights - from_weights(x_ref).weights)) <= 1e-8


def test_limited_matches_scipy_objective_ill_conditioned(rng):
    # Narrow grid: the trig columns are nearly degenerate, so solvers
    # stopping on dual (gradient) tolerance leave a residual that is an
    # almost-null-space mode. The objectives must still agree to the
    # tolerance that a 1e-12 gradient bound implies.
    d = random_distribution(rng, 20)
    grid = PhiGrid.uniform(0.4, 21)
    samples = characteristic_function(d, grid)
    result = recover_limited(samples, grid, 20)
    a, b = stacked_system(grid, samples, 20)
    _, rnorm_ref = optimize.nnls(a, b)
    rnorm_ours = result.residual * math.sqrt(b.size)
    assert rnorm_ours <= rnorm_ref + 1e-5


def test_limited_rejects_shape_mismatch(rng):
    d = random_distribution(rng, 10)
    grid = PhiGrid.uniform(0.3, 11)
    samples = characteristic_function(d, grid)
    with pytest.raises(ValueError):
        recover_limited(samples[:-1], grid, 10)


def test_limited_reports_nonconvergence(rng):
    d = random_distribution(rng, 24)
    grid = PhiGrid.uniform(0.2, 25)
    samples = characteristic_function(d, grid)
    result = recover_limited(samples, grid, 24, maxiter=2)
    assert not result.converged
    assert result.iterations >= 2
    # best iterate is still usable
    assert result.distribution.weights.sum() == pytest.approx(1.0, abs=1e-12)
