"""Dimensionless energies to electron-volts, and transition wavelengths.

With ``x = r / x0`` the dimensionless equation ``-psi'' + V psi = E psi`` maps
to physical energies ``E_phys = hbar**2 / (2 m x0**2) * E``.

The constants are the rounded textbook values behind the commonly quoted
6.1042e-21 J (about 38.10 meV) at x0 = 10 Angstrom for the electron, and
``hc = 1.2424 eV um``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

HBAR = 1.0546e-34          # J s
ELECTRON_MASS = 9.11e-31   # kg
EV = 1.602e-19             # J
HC_EV_UM = 1.2424          # eV um
ANGSTROM = 1e-10           # m

VIOLET_EDGE_UM = 0.4
RED_EDGE_UM = 0.8


def energy_scale(x0_angstrom: float, mass: float = ELECTRON_MASS) -> float:
    """eV per dimensionless energy unit for length scale ``x0`` (Angstrom)."""
    if x0_angstrom <= 0 or mass <= 0:
        raise ValueError("x0 and mass must be positive")
    x0 = x0_angstrom * ANGSTROM
    return HBAR ** 2 / (2.0 * mass * x0 ** 2) / EV


@dataclass(frozen=True)
class UnitContext:
    x0: float = 10.0
    mass: float = ELECTRON_MASS

    def __post_init__(self):
        if self.x0 <= 0 or self.mass <= 0:
            raise ValueError("x0 and mass must be positive")

    @property
    def energy_scale(self) -> float:
        return energy_scale(self.x0, self.mass)

    def to_ev(self, e: float) -> float:
        return e * self.energy_scale

    def to_dict(self) -> dict:
        return {"x0_angstrom": self.x0, "mass_kg": self.mass,
                "energy_scale_ev": self.energy_scale}


def transition_wavelength(delta_e: float, ctx: UnitContext) -> float:
    """Wavelength in micrometres for a dimensionless energy difference."""
    if not delta_e > 0 or not math.isfinite(delta_e):
        raise ValueError(f"energy difference must be positive, got {delta_e}")
    return HC_EV_UM / (delta_e * ctx.energy_scale)


def energy_for_wavelength(lambda_um: float, ctx: UnitContext) -> float:
    """Inverse of :func:`transition_wavelength`."""
    if not lambda_um > 0:
        raise ValueError("wavelength must be positive")
    return HC_EV_UM / (lambda_um * ctx.energy_scale)


def classify_band(lambda_um: float) -> str:
    if not lambda_um > 0:
        raise ValueError("wavelength must be positive")
    if lambda_um < VIOLET_EDGE_UM:
        return "UV"
    if lambda_um <= RED_EDGE_UM:
        return "visible"
    return "IR"
