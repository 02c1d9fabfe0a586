"""Bound-state spectra of the cosh-sech potential by the asymptotic iteration method."""

__version__ = "0.1.0"

from .aim import EigenvalueCandidate, SolverConfig, solve  # noqa: E402
from .potentials import PotentialSpec, extrema, init_coeffs, v_eval  # noqa: E402
from .spectrum import (classify, solve_spectrum, splitting_curve, straddling_pairs,  # noqa: E402
                       sweep)
from .units import UnitContext, transition_wavelength  # noqa: E402

__all__ = [
    "EigenvalueCandidate", "PotentialSpec", "SolverConfig", "UnitContext", "classify",
    "extrema", "init_coeffs", "solve", "solve_spectrum", "splitting_curve", "straddling_pairs",
    "sweep",
    "transition_wavelength", "v_eval",
]
