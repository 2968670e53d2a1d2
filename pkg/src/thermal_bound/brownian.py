"""Caldeira-Leggett Brownian oscillator with a Drude friction kernel.

The bath enters only through the friction function
``gamma(w) = i eta Omega / (w + i zeta)``, giving the susceptibility
``chi(w) = (1/m) / (Omega^2 - w^2 - i w gamma(w))``.

:func:`matsubara_var_x` evaluates the same position variance from the
imaginary-frequency representation and shares no code with the
quadrature route in :mod:`thermal_bound.spectral`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .errors import DomainError, NumericError
from .spectral import SusceptibilityModel, ThermalState

POLE_TOL = 1e-14
MATSUBARA_START = 64
MATSUBARA_MAX = 2**24


@dataclass(frozen=True)
class OscillatorModel:
    mass: float = 1.0
    omega0: float = 1.0
    eta: float = 10.0
    zeta: float = 10.0

    def __post_init__(self):
        for name in ("mass", "omega0", "zeta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.eta) and self.eta >= 0):
            raise DomainError(f"eta must be nonnegative and finite, got {self.eta!r}")

    @property
    def tail_coefficient(self) -> float:
        """``A`` in ``Im chi(w) ~ A / w^5``."""
        return self.eta * self.omega0 * self.zeta / self.mass

    @property
    def zero_slope(self) -> float:
        """``lim_{w->0} Im chi(w)/w = (eta Omega/zeta) / (m Omega^4)``."""
        return self.eta * self.omega0 / self.zeta / (self.mass * self.omega0**4)

    def poles(self) -> np.ndarray:
        """Roots of ``(Omega^2 - w^2)(w + i zeta) + eta Omega w``."""
        om, z, e = self.omega0, self.zeta, self.eta
        return np.roots([-1.0, -1j * z, om**2 + e * om, 1j * z * om**2])


def drude_friction(model: OscillatorModel, omega):
    w = np.asarray(omega, dtype=float)
    out = 1j * model.eta * model.omega0 / (w + 1j * model.zeta)
    return complex(out) if out.ndim == 0 else out


def susceptibility(model: OscillatorModel, omega):
    w = np.asarray(omega, dtype=float)
    om2 = model.omega0**2
    if model.eta == 0 and np.any(np.abs(w * w - om2) < POLE_TOL * om2):
        raise NumericError("undamped oscillator evaluated at its resonance")
    denom = om2 - w * w - 1j * w * drude_friction(model, w)
    out = (1.0 / model.mass) / denom
    return complex(out) if out.ndim == 0 else out


def im_susceptibility(model: OscillatorModel, omega):
    """``Im chi(w)`` in real arithmetic."""
    w = np.asarray(omega, dtype=float)
    m, om, e, z = model.mass, model.omega0, model.eta, model.zeta
    d = w * w + z * z
    friction_re = e * om * z / d
    real = (om - w) * (om + w) + e * om * w * w / d
    imag = friction_re * w
    return (imag / (real * real + imag * imag)) / m


def to_susceptibility_model(model: OscillatorModel) -> SusceptibilityModel:
    if model.eta == 0:
        raise DomainError("eta = 0 gives a delta spectrum; use a small positive eta")
    poles = model.poles()
    features = tuple((abs(p.real), abs(p.imag)) for p in poles)
    scale = max(model.omega0, model.zeta, max(abs(p) for p in poles))

    def im_chi(w):
        return im_susceptibility(model, w)

    return SusceptibilityModel(
        im_chi=im_chi,
        mass=model.mass,
        tail_coefficient=model.tail_coefficient,
        tail_exponent=5.0,
        frequency_scale=model.omega0,
        tail_start=100.0 * scale,
        zero_slope=model.zero_slope,
        features=features,
    )


def _matsubara_sum(term, tail_coeffs, state: ThermalState, rel_tol: float) -> float:
    """``sum_n term(nu_n)`` over all integers with an asymptotic tail.

    ``tail_coeffs`` maps a power ``s`` to ``c_s`` in ``term(nu) ~ sum c_s nu^-s``;
    the omitted terms beyond ``N`` are added through Hurwitz zeta functions.
    ``N`` doubles until successive estimates agree to ``rel_tol``.
    """
    step = 2.0 * math.pi / state.beta_hbar
    zero = float(term(np.array([0.0]))[0])

    def estimate(n_max):
        nu = step * np.arange(1, n_max + 1, dtype=float)
        body = float(np.sum(term(nu)[::-1]))
        tail = sum(c * step**-s * float(hurwitz_zeta(s, n_max + 1)) for s, c in tail_coeffs.items())
        return zero + 2.0 * (body + tail)

    n = MATSUBARA_START
    prev = estimate(n)
    while n < MATSUBARA_MAX:
        n *= 2
        cur = estimate(n)
        if abs(cur - prev) <= rel_tol * abs(cur):
            return cur
        prev = cur
    raise NumericError("Matsubara sum did not converge", partial=prev)


def matsubara_var_x(model: OscillatorModel, state: ThermalState, rel_tol: float = 1e-12) -> float:
    """``(1/(m beta)) sum_n 1/(Omega^2 + nu_n^2 + |nu_n| gamma(|nu_n|))``."""
    om, e, z = model.omega0, model.eta, model.zeta

    def term(nu):
        return 1.0 / (om * om + nu * nu + nu * e * om / (nu + z))

    tail = {2: 1.0, 4: -(om * om + e * om), 5: e * om * z}
    return _matsubara_sum(term, tail, state, rel_tol) / (model.mass * state.beta)


def matsubara_var_p(model: OscillatorModel, state: ThermalState, rel_tol: float = 1e-12) -> float:
    """``(m/beta) sum_n (Omega^2 + |nu| gamma)/(Omega^2 + nu^2 + |nu| gamma)``."""
    om, e, z = model.omega0, model.eta, model.zeta
    a0 = om * om + e * om

    def term(nu):
        friction = nu * e * om / (nu + z)
        return (om * om + friction) / (om * om + nu * nu + friction)

    tail = {2: a0, 3: -e * om * z, 4: e * om * z * z - a0 * a0}
    return _matsubara_sum(term, tail, state, rel_tol) * model.mass / state.beta


def undamped_var_x(model: OscillatorModel, state: ThermalState) -> float:
    """``(hbar/(2 m Omega)) coth(beta hbar Omega/2)``."""
    hbar = state.units.hbar
    x = state.beta_hbar * model.omega0
    return hbar / (2.0 * model.mass * model.omega0) / math.tanh(0.5 * x)


def undamped_var_p(model: OscillatorModel, state: ThermalState) -> float:
    hbar = state.units.hbar
    x = state.beta_hbar * model.omega0
    return 0.5 * hbar * model.mass * model.omega0 / math.tanh(0.5 * x)
