"""Quantum interaction of a pulsed electron beam with a single qubit.

The package models one interaction primitive: an electron wave packet
passing a two-level system imprints a number-dependent rotation
exp(-i phi Sigma_alpha N) on the pair. Everything else is built from it:

* ``couplings``     -- how large phi is in free space and with a cavity
                       bus, and when the detuned description is valid,
* ``distributions`` -- number statistics on a truncated ladder,
* ``core``          -- exact states/unitaries for cross-checking,
* ``protocols``     -- readout, statistics recovery, and conditioned
                       projection onto number states,
* ``cli``           -- reproducible batch runs from YAML configs.

Closed-form hot paths live in ``_kernels`` with a compiled backend and
a pure NumPy fallback chosen at import time.
"""

from ._kernels import backend_name
from .constants import CONSTANTS_VERSION, DEFAULT_CONSTANTS, PhysicalConstants
from .core import (
    ElectronDensityMatrix,
    JointState,
    MeasurementResult,
    QubitExpectations,
    QubitState,
    ScatterParams,
    apply_qubit_unitary,
    apply_scatter,
    measure_qubit_z,
    prepare_joint,
    preparation_rotation,
    qubit_block_rotation,
    qubit_expectations,
    scattering_unitary,
    sigma_alpha,
)
from .couplings import (
    CavityParams,
    FreeSpaceGeometry,
    RegimeReport,
    bessel_k1,
    coupling_phase,
    decay_rates,
    effective_phi_multipass,
    g_quantum,
    phi_cavity,
    phi_free_space,
    scaled_k1,
    validate_dispersive_regime,
)
from .distributions import (
    NumberDistribution,
    floored,
    fock,
    from_weights,
    kl_divergence,
    load_distribution,
    poisson,
    save_distribution,
    thermal_bsv_proxy,
)
from .nnls import NNLSResult, nnls
from .protocols import (
    BINARY_ANGLE_CONVENTION,
    MonteCarloReadout,
    PhiGrid,
    ProjectionTrajectory,
    ProtocolSchedule,
    Readout,
    ReadoutCurve,
    RecoveryResult,
    ScheduleStep,
    StepOutcome,
    TrajectoryRecord,
    binary_schedule,
    characteristic_function,
    discrimination_readout,
    monte_carlo_readout,
    projection_step,
    readout_curve,
    recover_exact,
    recover_limited,
    run_projection,
    uniform_schedule,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend_name",
    "CONSTANTS_VERSION",
    "DEFAULT_CONSTANTS",
    "PhysicalConstants",
    "ElectronDensityMatrix",
    "JointState",
    "MeasurementResult",
    "QubitExpectations",
    "QubitState",
    "ScatterParams",
    "apply_qubit_unitary",
    "apply_scatter",
    "measure_qubit_z",
    "prepare_joint",
    "preparation_rotation",
    "qubit_block_rotation",
    "qubit_expectations",
    "scattering_unitary",
    "sigma_alpha",
    "CavityParams",
    "FreeSpaceGeometry",
    "RegimeReport",
    "bessel_k1",
    "coupling_phase",
    "decay_rates",
    "effective_phi_multipass",
    "g_quantum",
    "phi_cavity",
    "phi_free_space",
    "scaled_k1",
    "validate_dispersive_regime",
    "NumberDistribution",
    "floored",
    "fock",
    "from_weights",
    "kl_divergence",
    "load_distribution",
    "poisson",
    "save_distribution",
    "thermal_bsv_proxy",
    "NNLSResult",
    "nnls",
    "BINARY_ANGLE_CONVENTION",
    "MonteCarloReadout",
    "PhiGrid",
    "ProjectionTrajectory",
    "ProtocolSchedule",
    "Readout",
    "ReadoutCurve",
    "RecoveryResult",
    "ScheduleStep",
    "StepOutcome",
    "TrajectoryRecord",
    "binary_schedule",
    "characteristic_function",
    "discrimination_readout",
    "monte_carlo_readout",
    "projection_step",
    "readout_curve",
    "recover_exact",
    "recover_limited",
    "run_projection",
    "uniform_schedule",
]
