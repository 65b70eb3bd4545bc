"""Frozen physical constants (CODATA 2018), SI units.

Values are pinned in source so that every run of the package reproduces
identical numbers regardless of the host environment.
"""

from dataclasses import dataclass

CONSTANTS_VERSION = "CODATA-2018"

BOHR_MAGNETON = 9.2740100783e-24     # J/T
VACUUM_PERMEABILITY = 1.25663706212e-6  # T*m/A
ELEMENTARY_CHARGE = 1.602176634e-19  # C (exact)
HBAR = 1.054571817e-34               # J*s
SPEED_OF_LIGHT = 2.99792458e8        # m/s (exact)


@dataclass(frozen=True)
class PhysicalConstants:
    """The constants entering the free-space coupling strength.

    Defaults are the CODATA 2018 values above; all must be positive.
    """

    mu_B: float = BOHR_MAGNETON
    mu_0: float = VACUUM_PERMEABILITY
    e_charge: float = ELEMENTARY_CHARGE
    hbar: float = HBAR

    def __post_init__(self):
        for name in ("mu_B", "mu_0", "e_charge", "hbar"):
            value = getattr(self, name)
            if not (value > 0.0):
                raise ValueError(f"{name} must be strictly positive, got {value}")


DEFAULT_CONSTANTS = PhysicalConstants()
