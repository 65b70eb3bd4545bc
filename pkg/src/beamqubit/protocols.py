"""Measurement protocols built on the beam-qubit interaction.

Three families:

* discrimination -- read the qubit after one pass; the (z, y)
  expectation pair equals the characteristic function
  N(phi) = sum_n p(n) exp(-2 i phi n) of the beam's number statistics,
* recovery -- invert N(phi) samples back into p(n), either exactly
  (samples on the commensurate grid phi_k = pi k / (n_max + 1)) or by
  non-negative least squares when only small strengths are reachable,
* projection -- repeated conditioned rounds that filter the beam toward
  a chosen number state, with per-round success bookkeeping.

All protocol math runs through the closed forms in ``_kernels``; the
exact unitary route in ``core`` exists to cross-check them, not to run
them. Readout formulas are stated in the declared alpha = 0 axis
convention; a nonzero coupling phase only rotates which transverse axis
carries the sine component and never changes the numbers below.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from . import _kernels
from .core import DEGENERATE_BRANCH_TOL, ElectronDensityMatrix
from .distributions import NumberDistribution, from_weights
from .nnls import nnls

__all__ = [
    "PhiGrid",
    "ScheduleStep",
    "ProtocolSchedule",
    "Readout",
    "ReadoutCurve",
    "StepOutcome",
    "TrajectoryRecord",
    "ProjectionTrajectory",
    "RecoveryResult",
    "MonteCarloReadout",
    "discrimination_readout",
    "readout_curve",
    "characteristic_function",
    "recover_exact",
    "recover_limited",
    "projection_step",
    "uniform_schedule",
    "binary_schedule",
    "run_projection",
    "monte_carlo_readout",
]

# Step angles of the halving schedule, indexed from i = 0:
#   phi_i = pi / 2**(i+1), theta_i = phi_i * n_star.
# The same angles are sometimes written pi / 2**i with the index starting
# at 1; only the labelling differs. Emitted in run metadata so output
# consumers know which convention produced the numbers.
BINARY_ANGLE_CONVENTION = "phi_i = pi / 2**(i+1), i = 0..ceil(log2(n_max+1)) - 1"


class PhiGrid:
    """Ordered interaction strengths in [0, pi] at which readout is taken.

    N(phi) has period pi, so nothing outside [0, pi] is ever needed.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("phi grid must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("phi grid must be finite")
        if arr[0] < 0.0 or arr[-1] > math.pi + 1e-12:
            raise ValueError("phi grid must lie within [0, pi]")
        if np.any(np.diff(arr) <= 0.0):
            raise ValueError("phi grid must be strictly increasing")
        arr.flags.writeable = False
        self._values = arr

    @classmethod
    def uniform(cls, phi_max, count):
        """count equally spaced points on (0, phi_max]: phi_max * k/count.

        Zero is excluded -- N(0) = 1 identically, so it carries no
        information beyond the normalization that the recovery step
        imposes anyway.
        """
        phi_max = float(phi_max)
        count = int(count)
        if not (0.0 < phi_max <= math.pi + 1e-12):
            raise ValueError(f"phi_max must be in (0, pi], got {phi_max}")
        if count < 1:
            raise ValueError(f"count must be >= 1, got {count}")
        return cls(phi_max * np.arange(1, count + 1) / count)

    @classmethod
    def exact(cls, n_max):
        """The commensurate grid phi_k = pi k / (n_max + 1), k = 0..n_max.

        On this grid the N(phi_k) samples are precisely the forward DFT
        of the weight vector, so recovery is exact.
        """
        n_max = int(n_max)
        if n_max < 0:
            raise ValueError(f"n_max must be >= 0, got {n_max}")
        size = n_max + 1
        return cls(math.pi * np.arange(size) / size)

    @property
    def values(self):
        return self._values

    def __len__(self):
        return self._values.size

    def __iter__(self):
        return iter(self._values)


class ScheduleStep(NamedTuple):
    phi: float
    theta: float


@dataclass(frozen=True)
class ProtocolSchedule:
    """Sequence of (phi, theta) rounds, optionally aimed at n_star."""

    steps: Tuple[ScheduleStep, ...]
    n_star: Optional[int] = None

    def __post_init__(self):
        if len(self.steps) == 0:
            raise ValueError("schedule must contain at least one step")
        for step in self.steps:
            if not (math.isfinite(step.phi) and math.isfinite(step.theta)):
                raise ValueError(f"schedule entries must be finite, got {step}")
        if self.n_star is not None and self.n_star < 0:
            raise ValueError(f"n_star must be >= 0, got {self.n_star}")

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


class Readout(NamedTuple):
    z: float
    y: float


class ReadoutCurve(NamedTuple):
    phis: np.ndarray
    z: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class StepOutcome:
    """Both conditioned branches of a single projection round.

    States match the input kind (NumberDistribution in, distribution
    out; density matrix in, density matrix out). A branch whose
    probability is below the degeneracy threshold is None.
    """

    p_down: float
    p_up: float
    down: object
    up: object


class TrajectoryRecord(NamedTuple):
    step: int
    phi: float
    theta: float
    p_down: float
    fidelity: float  # weight at n_star after this round; nan without n_star
    cumulative_success: float


@dataclass(frozen=True)
class ProjectionTrajectory:
    schedule: ProtocolSchedule
    records: Tuple[TrajectoryRecord, ...]
    final: object  # NumberDistribution or ElectronDensityMatrix
    cumulative_success: float
    post_selected: bool

    @property
    def expected_attempts(self):
        """Mean number of fresh-beam attempts per fully successful run
        when any up outcome restarts the protocol from a new beam."""
        if not self.post_selected:
            return 1.0
        if self.cumulative_success == 0.0:
            return math.inf
        return 1.0 / self.cumulative_success


@dataclass(frozen=True)
class RecoveryResult:
    distribution: NumberDistribution
    method: str  # "fourier" or "nnls"
    residual: float  # rms misfit between input samples and the estimate
    converged: bool
    iterations: int
    clipped_mass: float  # negative mass discarded before renormalizing


class MonteCarloReadout(NamedTuple):
    z: float
    z_stderr: float
    y: float
    y_stderr: float
    shots: int


def _weights_of(dist):
    if isinstance(dist, NumberDistribution):
        return dist.weights
    return NumberDistribution(dist).weights


def discrimination_readout(dist, phi):
    """Qubit readout pair after one pass of a beam with statistics ``dist``:

    z = sum_n p(n) cos(2 phi n),  y = sum_n p(n) sin(2 phi n).
    """
    w = _weights_of(dist)
    z, y = _kernels.readout_sums(w, np.array([float(phi)]))
    return Readout(z=float(z[0]), y=float(y[0]))


def readout_curve(dist, grid):
    """Vectorized discrimination_readout over a PhiGrid or phi array."""
    phis = grid.values if isinstance(grid, PhiGrid) else np.asarray(grid, dtype=float)
    w = _weights_of(dist)
    z, y = _kernels.readout_sums(w, phis)
    return ReadoutCurve(phis=phis, z=z, y=y)


def characteristic_function(dist, phi):
    """N(phi) = z - i y = sum_n p(n) exp(-2 i phi n).

    Accepts a scalar phi (returns a complex number) or a PhiGrid/array
    (returns a complex array). N(0) = 1, |N| <= 1, and N has period pi,
    so the commensurate grid on [0, pi) already sees everything.
    """
    scalar = np.isscalar(phi) or (
        not isinstance(phi, PhiGrid) and np.ndim(phi) == 0
    )
    curve = readout_curve(dist, np.atleast_1d(phi) if scalar else phi)
    samples = curve.z - 1j * curve.y
    return complex(samples[0]) if scalar else samples


def recover_exact(samples, n_max=None):
    """Invert characteristic samples taken on the commensurate grid.

    ``samples[k]`` must be N(phi_k) at phi_k = pi k / (n_max + 1) for
    k = 0..n_max; those are exactly the forward DFT of the weights, so a
    single inverse FFT recovers them. Noisy samples can leave small
    negative weights or an imaginary residue; negatives are clipped to
    zero (the discarded mass is reported) and an imaginary residue
    above 1e-10 is rejected as a wrong-grid signature.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim != 1 or samples.size == 0:
        raise ValueError("samples must be a non-empty 1-d sequence")
    if n_max is not None and samples.size != int(n_max) + 1:
        raise ValueError(
            f"expected {int(n_max) + 1} samples for n_max={n_max}, got {samples.size}"
        )
    raw = np.fft.ifft(samples)
    imag_residue = float(np.max(np.abs(raw.imag)))
    if imag_residue > 1e-10:
        raise ValueError(
            f"imaginary residue {imag_residue:.3g} exceeds 1e-10; samples do "
            "not look like characteristic values on the commensurate grid"
        )
    weights = np.real(raw)
    clipped = float(-np.sum(np.minimum(weights, 0.0)))
    weights = np.maximum(weights, 0.0)
    if weights.sum() <= 0.0:
        raise ValueError("recovered weights have no positive mass")
    dist = from_weights(weights)
    model = characteristic_function(dist, PhiGrid.exact(weights.size - 1))
    residual = float(np.sqrt(np.mean(np.abs(model - samples) ** 2)))
    return RecoveryResult(
        distribution=dist,
        method="fourier",
        residual=residual,
        converged=True,
        iterations=0,
        clipped_mass=clipped,
    )


def recover_limited(samples, grid, n_max, maxiter=None, tol=1e-12):
    """Estimate p(n) from characteristic samples on an arbitrary grid.

    Stacks the real and imaginary constraints
        Re N(phi_k) =  sum_n p(n) cos(2 phi_k n)
        Im N(phi_k) = -sum_n p(n) sin(2 phi_k n)
    and solves for non-negative p by active-set least squares, then
    renormalizes onto the simplex. With strengths capped well below the
    commensurate grid the system is badly conditioned and the
    non-negativity constraint carries most of the information; expect
    only low moments of the estimate to be trustworthy there.

    Non-convergence is reported through the result's ``converged``
    field, with the best iterate still returned.
    """
    samples = np.asarray(samples, dtype=complex)
    phis = grid.values if isinstance(grid, PhiGrid) else np.asarray(grid, dtype=float)
    if samples.shape != phis.shape:
        raise ValueError(f"got {samples.size} samples for {phis.size} grid points")
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    n = np.arange(n_max + 1)
    arg = 2.0 * np.outer(phis, n)
    a = np.vstack([np.cos(arg), -np.sin(arg)])
    b = np.concatenate([np.real(samples), np.imag(samples)])
    if maxiter is None:
        maxiter = 10 * (n_max + 1)
    fit = nnls(a, b, maxiter=maxiter, tol=tol)
    if float(fit.x.sum()) <= 0.0:
        raise ValueError("recovery produced an all-zero estimate")
    return RecoveryResult(
        distribution=from_weights(fit.x),
        method="nnls",
        residual=float(fit.rnorm / np.sqrt(b.size)),
        converged=fit.converged,
        iterations=fit.iterations,
        clipped_mass=0.0,
    )


def projection_step(electron, phi, theta, tol=DEGENERATE_BRANCH_TOL):
    """One conditioned round: rotate the qubit by theta, scatter at phi,
    measure the qubit, and return both conditioned electron branches.

    The closed form of the round is a cosine filter on the ladder:
    finding the qubit down multiplies amplitude n by cos(phi n - theta),
    finding it up by sin(phi n - theta). The coupling phase alpha drops
    out exactly: it only attaches a global phase to the up branch, which
    affects neither probabilities nor conditioned states.
    """
    phi = float(phi)
    theta = float(theta)
    if isinstance(electron, ElectronDensityMatrix):
        p_down, p_up, rho_down, rho_up = _kernels.cosine_filter_matrix(
            electron.rho, phi, theta
        )
        down = (
            None
            if p_down < tol
            else ElectronDensityMatrix(rho_down / p_down, check=False)
        )
        up = None if p_up < tol else ElectronDensityMatrix(rho_up / p_up, check=False)
    else:
        w = _weights_of(electron)
        p_down, p_up, w_down, w_up = _kernels.cosine_filter_diag(w, phi, theta)
        down = None if p_down < tol else from_weights(w_down)
        up = None if p_up < tol else from_weights(w_up)
    return StepOutcome(p_down=p_down, p_up=p_up, down=down, up=up)


def uniform_schedule(phi, n_star, steps):
    """Constant-strength schedule: every round uses (phi, phi * n_star).

    Each post-selected round keeps rung n with weight
    cos^2(phi (n - n_star)), so repetition concentrates the beam on
    n_star at a rate set by phi.
    """
    phi = float(phi)
    n_star = int(n_star)
    steps = int(steps)
    if not (phi > 0.0 and math.isfinite(phi)):
        raise ValueError(f"phi must be positive, got {phi}")
    if n_star < 0:
        raise ValueError(f"n_star must be >= 0, got {n_star}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    theta = phi * n_star
    return ProtocolSchedule(
        steps=tuple(ScheduleStep(phi, theta) for _ in range(steps)), n_star=n_star
    )


def binary_schedule(n_star, n_max):
    """Halving schedule that projects exactly in ceil(log2(n_max+1)) rounds.

    Step i uses phi_i = pi / 2**(i+1) and theta_i = phi_i * n_star
    (see BINARY_ANGLE_CONVENTION). Against any offset d = n - n_star the
    surviving amplitude after all L rounds is
        prod_{j=1..L} cos(pi d / 2**j) = sin(pi d) / (2**L sin(pi d / 2**L)),
    which vanishes for every integer d != 0 with |d| < 2**L. Choosing
    L = ceil(log2(n_max + 1)) covers the whole ladder, so the down-branch
    final state is the number state n_star exactly.
    """
    n_star = int(n_star)
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    if not 0 <= n_star <= n_max:
        raise ValueError(f"n_star must be in [0, {n_max}], got {n_star}")
    rounds = max(1, math.ceil(math.log2(n_max + 1)))
    steps = []
    for i in range(rounds):
        phi = math.pi / 2 ** (i + 1)
        steps.append(ScheduleStep(phi, phi * n_star))
    return ProtocolSchedule(steps=tuple(steps), n_star=n_star)


def _fidelity(state, n_star):
    if n_star is None:
        return math.nan
    if isinstance(state, ElectronDensityMatrix):
        probs = state.number_probabilities()
    else:
        probs = state.weights
    return float(probs[n_star]) if n_star < probs.size else 0.0


def run_projection(
    electron,
    schedule,
    post_select_all_down=True,
    target_fidelity=None,
    tol=DEGENERATE_BRANCH_TOL,
):
    """Run a schedule of conditioned rounds over the beam state.

    With post_select_all_down (the default, and the success criterion of
    the protocol) only the qubit-down branch survives each round, and
    the trajectory tracks the probability of having seen down every
    time; expected_attempts on the result converts that into the mean
    number of fresh beams needed when any up outcome restarts the run.

    With the flag off the unconditioned mixture is kept instead. Number
    populations are then untouched round by round (the branches
    recombine with cos^2 + sin^2 = 1) and only number coherences decay,
    so this mode is informative only for density-matrix inputs.

    target_fidelity, if given, stops the run early once the down-branch
    weight at schedule.n_star reaches it.
    """
    if target_fidelity is not None:
        if schedule.n_star is None:
            raise ValueError("target_fidelity needs a schedule with n_star")
        if not 0.0 < target_fidelity <= 1.0:
            raise ValueError(
                f"target_fidelity must be in (0, 1], got {target_fidelity}"
            )
    if isinstance(electron, (ElectronDensityMatrix, NumberDistribution)):
        state = electron
    else:
        state = NumberDistribution(electron)
    records = []
    cumulative = 1.0
    for i, (phi, theta) in enumerate(schedule):
        outcome = projection_step(state, phi, theta, tol=tol)
        if post_select_all_down:
            if outcome.down is None:
                raise ValueError(
                    f"down branch vanished at step {i} (p_down={outcome.p_down:.3g}); "
                    "the schedule filters out the entire remaining state"
                )
            state = outcome.down
            cumulative *= outcome.p_down
        elif isinstance(state, ElectronDensityMatrix):
            # Unconditioned round: the unnormalized branches sum back to
            # a unit-trace state; populations survive, coherences decay.
            _, _, rho_down, rho_up = _kernels.cosine_filter_matrix(
                state.rho, float(phi), float(theta)
            )
            state = ElectronDensityMatrix(rho_down + rho_up, check=False)
        records.append(
            TrajectoryRecord(
                step=i,
                phi=float(phi),
                theta=float(theta),
                p_down=outcome.p_down,
                fidelity=_fidelity(state, schedule.n_star),
                cumulative_success=cumulative if post_select_all_down else 1.0,
            )
        )
        if (
            target_fidelity is not None
            and post_select_all_down
            and records[-1].fidelity >= target_fidelity
        ):
            break
    return ProjectionTrajectory(
        schedule=schedule,
        records=tuple(records),
        final=state,
        cumulative_success=cumulative if post_select_all_down else 1.0,
        post_selected=post_select_all_down,
    )


def monte_carlo_readout(dist, phi, shots, seed=None, rng=None):
    """Sampled discrimination readout with binomial shot noise.

    Each shot draws an electron number n from ``dist`` and then a +/-1
    outcome for each readout axis: P(+1) = (1 + cos 2 phi n)/2 for z and
    (1 + sin 2 phi n)/2 for y, which makes both estimators unbiased.
    Standard errors use the sample standard deviation (ddof=1) and are
    nan for a single shot. Given the same seed the output is
    bit-identical across runs.
    """
    shots = int(shots)
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if rng is None:
        rng = np.random.default_rng(seed)
    w = _weights_of(dist)
    ns = rng.choice(w.size, size=shots, p=w)
    arg = 2.0 * float(phi) * ns
    pz = 0.5 * (1.0 + np.cos(arg))
    py = 0.5 * (1.0 + np.sin(arg))
    z_shots = np.where(rng.random(shots) < pz, 1.0, -1.0)
    y_shots = np.where(rng.random(shots) < py, 1.0, -1.0)

    def stderr(xs):
        if shots < 2:
            return math.nan
        return float(np.std(xs, ddof=1) / math.sqrt(shots))

    return MonteCarloReadout(
        z=float(z_shots.mean()),
        z_stderr=stderr(z_shots),
        y=float(y_shots.mean()),
        y_stderr=stderr(y_shots),
        shots=shots,
    )
