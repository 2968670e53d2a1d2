"""Thermal (Boltzmann-state) lower bound on the position-momentum uncertainty product."""

from .brownian import OscillatorModel, matsubara_var_p, matsubara_var_x, to_susceptibility_model
from .errors import DomainError, EvaluatorError, NumericError
from .spectral import SusceptibilityModel, ThermalState, jensen_check, moments
from .specfun import UnitSystem, boltzmann_bound, g, g_inverse, gamma_big, thermal_wavelength
from .sweep import BoundReport, SweepConfig, run_sweep, verify_chain

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "DomainError", "EvaluatorError", "NumericError", "OscillatorModel",
    "SusceptibilityModel", "SweepConfig", "ThermalState", "UnitSystem", "boltzmann_bound",
    "g", "g_inverse", "gamma_big", "jensen_check", "matsubara_var_p", "matsubara_var_x",
    "moments", "run_sweep", "thermal_wavelength", "to_susceptibility_model",
    "verify_chain",
]
