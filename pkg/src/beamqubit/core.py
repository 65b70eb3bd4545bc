"""States and exact quantum operations for the beam-qubit interaction.

Conventions used throughout the package:

* qubit basis is (|down>, |up>) with down at index 0,
* joint vectors/matrices order the factors qubit (x) number, so the flat
  index is q * (n_max + 1) + n,
* the scattering unitary is S = exp(-i phi Sigma_alpha (x) N), which is
  block diagonal over n with 2x2 blocks
  cos(phi n) I - i sin(phi n) Sigma_alpha,
* readout components are x = 2 Re rho01, y = 2 Im rho01,
  z = rho00 - rho11 of the reduced qubit state, so the initialized spin
  reads z = +1 and a scattered Fock state n gives z = cos(2 phi n),
  y = sin(2 phi n) at alpha = 0.

Everything here is exact linear algebra on truncated ladders. It exists
as the oracle against which the closed forms in protocols.py are
checked; the protocols themselves never build these matrices.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .distributions import NumberDistribution

__all__ = [
    "QubitState",
    "ElectronDensityMatrix",
    "JointState",
    "ScatterParams",
    "QubitExpectations",
    "MeasurementResult",
    "sigma_alpha",
    "qubit_block_rotation",
    "preparation_rotation",
    "scattering_unitary",
    "prepare_joint",
    "apply_scatter",
    "apply_qubit_unitary",
    "qubit_expectations",
    "measure_qubit_z",
]

# Largest ladder for which the dense 2(n_max+1) unitary may be built.
MAX_DENSE_LADDER = 4096

# Branch probabilities below this are treated as numerically absent; the
# corresponding post-measurement state is undefined and reported as None.
DEGENERATE_BRANCH_TOL = 1e-14

_HERM_TOL = 1e-12


def _validate_density(rho, what, psd=True):
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{what} must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho.view(float))):
        raise ValueError(f"{what} must be finite")
    if not np.allclose(rho, rho.conj().T, rtol=0.0, atol=_HERM_TOL):
        raise ValueError(f"{what} must be Hermitian within {_HERM_TOL}")
    tr = float(np.real(np.trace(rho)))
    if abs(tr - 1.0) > _HERM_TOL * rho.shape[0]:
        raise ValueError(f"{what} must have unit trace, got {tr}")
    if psd and float(np.linalg.eigvalsh(rho)[0]) < -_HERM_TOL:
        raise ValueError(f"{what} has a negative eigenvalue")


class QubitState:
    """Two-level state as a 2x2 density matrix (read-only)."""

    __slots__ = ("_rho",)

    def __init__(self, rho, check=True):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError(f"qubit state must be 2x2, got {rho.shape}")
        if check:
            _validate_density(rho, "qubit state")
        self._rho = rho
        self._rho.flags.writeable = False

    @classmethod
    def down(cls):
        return cls(np.diag([1.0, 0.0]).astype(complex), check=False)

    @classmethod
    def up(cls):
        return cls(np.diag([0.0, 1.0]).astype(complex), check=False)

    @classmethod
    def mixed(cls, p_down=0.5):
        p_down = float(p_down)
        if not 0.0 <= p_down <= 1.0:
            raise ValueError(f"p_down must be in [0, 1], got {p_down}")
        return cls(np.diag([p_down, 1.0 - p_down]).astype(complex), check=False)

    @property
    def rho(self):
        return self._rho

    def purity(self):
        return float(np.real(np.trace(self._rho @ self._rho)))

    def is_pure(self, tol=1e-12):
        return self.purity() >= 1.0 - tol

    def pure_vector(self, tol=1e-12):
        """Amplitude vector if the state is pure, else None."""
        if not self.is_pure(tol):
            return None
        _, vecs = np.linalg.eigh(self._rho)
        return vecs[:, -1]

    def validate(self):
        _validate_density(self._rho, "qubit state")


class ElectronDensityMatrix:
    """Electron number-sector density matrix on the ladder 0..n_max.

    The constructor's cheap checks (Hermiticity, trace, finiteness) run
    unless check=False; the O(n^3) positivity check is in validate(),
    called explicitly where it matters.
    """

    __slots__ = ("_rho",)

    def __init__(self, rho, check=True):
        rho = np.asarray(rho, dtype=complex)
        if check:
            _validate_density(rho, "electron density matrix", psd=False)
        self._rho = rho
        self._rho.flags.writeable = False

    @classmethod
    def from_distribution(cls, dist):
        """Diagonal (fully dephased) matrix carrying the given number
        statistics: the model of a beam whose number populations are
        known but whose number coherences are not."""
        if not isinstance(dist, NumberDistribution):
            dist = NumberDistribution(dist)
        return cls(np.diag(dist.weights).astype(complex), check=False)

    @classmethod
    def from_amplitudes(cls, amplitudes):
        """Rank-1 (pure) matrix |psi><psi| from number-state amplitudes."""
        psi = np.asarray(amplitudes, dtype=complex)
        if psi.ndim != 1 or psi.size == 0:
            raise ValueError("amplitudes must be a non-empty 1-d sequence")
        norm = np.linalg.norm(psi)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("amplitudes must have finite positive norm")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()), check=False)

    @property
    def rho(self):
        return self._rho

    @property
    def n_max(self):
        return self._rho.shape[0] - 1

    def number_probabilities(self):
        return np.clip(np.real(np.diag(self._rho)), 0.0, None)

    def distribution(self):
        return NumberDistribution(self.number_probabilities())

    def validate(self):
        _validate_density(self._rho, "electron density matrix")


@dataclass(frozen=True)
class ScatterParams:
    """Interaction strength and coupling phase of one beam pass."""

    phi: float
    alpha: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.phi) and math.isfinite(self.alpha)):
            raise ValueError("phi and alpha must be finite")


class JointState:
    """Qubit (x) electron state, stored as a vector when pure.

    The rank-1 representation keeps memory at O(n_max) for the common
    pure-state pipelines; mixed inputs use the full
    2(n_max+1) x 2(n_max+1) density matrix.
    """

    __slots__ = ("_vector", "_rho", "_n_max")

    def __init__(self, n_max, vector=None, rho=None, check=True):
        self._n_max = int(n_max)
        dim = 2 * (self._n_max + 1)
        if (vector is None) == (rho is None):
            raise ValueError("provide exactly one of vector or rho")
        if vector is not None:
            vec = np.asarray(vector, dtype=complex)
            if vec.shape != (dim,):
                raise ValueError(f"vector must have shape ({dim},), got {vec.shape}")
            if check:
                norm = np.linalg.norm(vec)
                if not math.isfinite(norm) or abs(norm - 1.0) > 1e-10:
                    raise ValueError(f"state vector must be normalized, |psi| = {norm}")
            self._vector = vec
            self._vector.flags.writeable = False
            self._rho = None
        else:
            mat = np.asarray(rho, dtype=complex)
            if mat.shape != (dim, dim):
                raise ValueError(f"rho must have shape ({dim}, {dim}), got {mat.shape}")
            if check:
                _validate_density(mat, "joint density matrix", psd=False)
            self._rho = mat
            self._rho.flags.writeable = False
            self._vector = None

    @property
    def n_max(self):
        return self._n_max

    @property
    def is_pure(self):
        return self._vector is not None

    @property
    def vector(self):
        return self._vector

    def as_rho(self):
        """Full joint density matrix (built on demand for pure states)."""
        if self._rho is not None:
            return self._rho
        return np.outer(self._vector, self._vector.conj())

    def _vec2(self):
        return self._vector.reshape(2, self._n_max + 1)

    def _rho4(self):
        n = self._n_max + 1
        return self._rho.reshape(2, n, 2, n)

    def qubit_rho(self):
        """Reduced 2x2 qubit state (partial trace over the ladder)."""
        if self.is_pure:
            psi = self._vec2()
            return psi @ psi.conj().T
        return np.einsum("qnpn->qp", self._rho4())

    def electron_rho(self):
        """Reduced electron state (partial trace over the qubit)."""
        if self.is_pure:
            psi = self._vec2()
            return np.einsum("qn,qm->nm", psi, psi.conj())
        return np.einsum("qnqm->nm", self._rho4())

    def number_probabilities(self):
        if self.is_pure:
            psi = self._vec2()
            return np.sum(np.abs(psi) ** 2, axis=0)
        return np.clip(np.real(np.einsum("qnqn->n", self._rho4())), 0.0, None)

    def validate(self):
        if self.is_pure:
            norm = np.linalg.norm(self._vector)
            if abs(norm - 1.0) > 1e-10:
                raise ValueError(f"state vector must be normalized, |psi| = {norm}")
        else:
            _validate_density(self._rho, "joint density matrix")


class QubitExpectations(NamedTuple):
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class MeasurementResult:
    """Both branches of a projective qubit z measurement.

    Branch states are conditioned electron density matrices (the qubit
    factor collapses to the outcome and carries no further information).
    A branch with probability below DEGENERATE_BRANCH_TOL has no
    well-defined post-measurement state; its field is None.
    """

    p_down: float
    p_up: float
    down: Optional[ElectronDensityMatrix]
    up: Optional[ElectronDensityMatrix]


def sigma_alpha(alpha=0.0):
    """Hermitian involution [[0, e^{i alpha}], [e^{-i alpha}, 0]].

    The qubit axis the beam couples to: an equal-weight combination of
    the two transverse Pauli operators at azimuth alpha. alpha = 0
    reduces it to the plain x flip.
    """
    e = complex(math.cos(alpha), math.sin(alpha))
    return np.array([[0.0, e], [e.conjugate(), 0.0]], dtype=complex)


def _rotation(angle, alpha):
    # Sigma_alpha squares to the identity, so the exponential closes
    # after one power: exp(-i angle Sigma) = cos(angle) I - i sin(angle) Sigma.
    return math.cos(angle) * np.eye(2, dtype=complex) - 1j * math.sin(
        angle
    ) * sigma_alpha(alpha)


def qubit_block_rotation(n, params):
    """Block n of the scattering unitary: exp(-i phi n Sigma_alpha).

    Exact closed form cos(phi n) I - i sin(phi n) Sigma_alpha; the Bloch
    rotation angle is 2 phi n.
    """
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return _rotation(params.phi * n, params.alpha)


def preparation_rotation(theta, alpha=0.0):
    """exp(+i theta Sigma_alpha), the pre-interaction qubit rotation.

    theta parameterizes a half-angle: acting on |down> and following
    with one scattering pass leaves down-amplitude cos(phi n - theta) on
    ladder rung n, which is what makes the conditioned cosine filters of
    the projection protocol exact.
    """
    return _rotation(-theta, alpha)


def _scatter_blocks(phi, n_max, alpha):
    """2x2 array of length-(n_max+1) diagonals of the scattering unitary."""
    n = np.arange(n_max + 1)
    c = np.cos(phi * n)
    s = np.sin(phi * n)
    e = complex(math.cos(alpha), math.sin(alpha))
    blocks = np.empty((2, 2, n_max + 1), dtype=complex)
    blocks[0, 0] = c
    blocks[0, 1] = -1j * e * s
    blocks[1, 0] = -1j * e.conjugate() * s
    blocks[1, 1] = c
    return blocks


def scattering_unitary(params, n_max):
    """Dense matrix of S = exp(-i phi Sigma_alpha (x) N).

    Only intended for cross-checks and small ladders; refuses ladders
    past MAX_DENSE_LADDER to avoid accidental multi-GB allocations. The
    protocol implementations never build this matrix.
    """
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    if n_max + 1 > MAX_DENSE_LADDER:
        raise ValueError(
            f"ladder size {n_max + 1} exceeds dense limit {MAX_DENSE_LADDER}; "
            "use apply_scatter, which works blockwise"
        )
    n = n_max + 1
    blocks = _scatter_blocks(params.phi, n_max, params.alpha)
    u = np.zeros((2 * n, 2 * n), dtype=complex)
    for q in range(2):
        for a in range(2):
            u[q * n : (q + 1) * n, a * n : (a + 1) * n] = np.diag(blocks[q, a])
    return u


def _coerce_qubit(qubit):
    """Return (vector or None, rho) for a qubit input."""
    if isinstance(qubit, QubitState):
        return qubit.pure_vector(), qubit.rho
    arr = np.asarray(qubit, dtype=complex)
    if arr.ndim == 1 and arr.shape == (2,):
        norm = np.linalg.norm(arr)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("qubit amplitudes must have finite positive norm")
        vec = arr / norm
        return vec, np.outer(vec, vec.conj())
    return _coerce_qubit(QubitState(arr))


def _coerce_electron(electron):
    """Return (vector or None, rho or None) for an electron input."""
    if isinstance(electron, NumberDistribution):
        support = np.flatnonzero(electron.weights)
        if support.size == 1:
            # A single-rung distribution is the pure number state; keep
            # the rank-1 representation.
            vec = np.zeros(electron.weights.size, dtype=complex)
            vec[support[0]] = 1.0
            return vec, None
        return None, np.diag(electron.weights).astype(complex)
    if isinstance(electron, ElectronDensityMatrix):
        return None, electron.rho
    arr = np.asarray(electron, dtype=complex)
    if arr.ndim == 1:
        norm = np.linalg.norm(arr)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("electron amplitudes must have finite positive norm")
        return arr / norm, None
    return None, ElectronDensityMatrix(arr).rho


def prepare_joint(electron, qubit=None):
    """Tensor the electron beam state with the qubit (default |down>).

    The electron may be an ElectronDensityMatrix, a NumberDistribution
    (taken as a diagonal matrix), or a vector of number-state
    amplitudes; the qubit a QubitState, a 2-vector of amplitudes, or a
    2x2 matrix. When both factors are pure the joint state stays a
    vector (rank-1 fast path).
    """
    if qubit is None:
        qubit = QubitState.down()
    q_vec, q_rho = _coerce_qubit(qubit)
    e_vec, e_rho = _coerce_electron(electron)
    if e_vec is not None:
        n_max = e_vec.size - 1
        if q_vec is not None:
            return JointState(n_max, vector=np.kron(q_vec, e_vec), check=False)
        e_rho = np.outer(e_vec, e_vec.conj())
    else:
        n_max = e_rho.shape[0] - 1
    return JointState(n_max, rho=np.kron(q_rho, e_rho), check=False)


def _apply_blocks(state, blocks):
    """Apply a qubit-space 2x2 of ladder diagonals to a JointState."""
    if state.is_pure:
        psi = np.einsum("qan,an->qn", blocks, state._vec2())
        return JointState(state.n_max, vector=psi.reshape(-1), check=False)
    rho = np.einsum(
        "qan,anbm,pbm->qnpm", blocks, state._rho4(), blocks.conj(), optimize=True
    )
    dim = 2 * (state.n_max + 1)
    return JointState(state.n_max, rho=rho.reshape(dim, dim), check=False)


def apply_scatter(state, params):
    """One pass of the beam past the qubit.

    Works directly on the 2x2 blocks (each diagonal over n), so cost is
    O(n_max) for vectors and O(n_max^2) for density matrices; the dense
    unitary is never formed. Fixed alpha makes repeated passes additive
    in phi.
    """
    return _apply_blocks(state, _scatter_blocks(params.phi, state.n_max, params.alpha))


def apply_qubit_unitary(state, u):
    """Apply a bare qubit unitary U (x) I to the joint state."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"qubit unitary must be 2x2, got {u.shape}")
    if not np.allclose(u @ u.conj().T, np.eye(2), atol=1e-10):
        raise ValueError("qubit operator is not unitary")
    blocks = np.repeat(u[:, :, None], state.n_max + 1, axis=2)
    return _apply_blocks(state, blocks)


def qubit_expectations(state):
    """(x, y, z) readout components of the reduced qubit state.

    Axes follow the declared convention: z assigns +1 to |down>, and at
    alpha = 0 a scattered number state n reads (0, sin 2 phi n,
    cos 2 phi n).
    """
    if isinstance(state, QubitState):
        rho = state.rho
    elif isinstance(state, JointState):
        rho = state.qubit_rho()
    else:
        rho = np.asarray(state, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError(f"expected a qubit state, got shape {rho.shape}")
    return QubitExpectations(
        x=float(2.0 * np.real(rho[0, 1])),
        y=float(2.0 * np.imag(rho[0, 1])),
        z=float(np.real(rho[0, 0] - rho[1, 1])),
    )


def measure_qubit_z(state, tol=DEGENERATE_BRANCH_TOL):
    """Projective qubit measurement in the (down, up) basis.

    Returns Born probabilities and the conditioned electron states as
    density matrices. The total-probability law
    p_down * down + p_up * up = (unconditioned reduced electron state)
    holds exactly by construction. A branch with probability below
    ``tol`` carries state None: renormalizing it would divide by
    (numerical) zero and any contents would be noise.
    """
    if state.is_pure:
        psi = state._vec2()
        probs = [float(np.sum(np.abs(psi[q]) ** 2)) for q in range(2)]
        branches = [
            None
            if probs[q] < tol
            else ElectronDensityMatrix(
                np.outer(psi[q], psi[q].conj()) / probs[q], check=False
            )
            for q in range(2)
        ]
    else:
        rho4 = state._rho4()
        probs = [float(np.real(np.trace(rho4[q, :, q, :]))) for q in range(2)]
        branches = [
            None
            if probs[q] < tol
            else ElectronDensityMatrix(rho4[q, :, q, :] / probs[q], check=False)
            for q in range(2)
        ]
    return MeasurementResult(
        p_down=probs[0], p_up=probs[1], down=branches[0], up=branches[1]
    )
