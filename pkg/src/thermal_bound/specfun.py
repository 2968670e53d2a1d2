"""Special functions behind the thermal uncertainty bound.

The bound is built from the scalar function ``g(x) = x tanh(x/2)``, its
inverse ``k = g^-1`` and the ratio ``Gamma(x) = k(x)/x``. For a particle of
mass ``m`` with position spread ``dx`` at inverse temperature ``beta``::

    dx * dp >= (hbar/2) * Gamma(beta hbar^2 / (2 m dx^2))

and the argument equals ``1/(4 pi r^2)`` with ``r = dx/lambda_th``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, NumericError

ArrayLike = Union[float, np.ndarray]

G_SERIES_SWITCH = 1e-4
GAMMA_SMALL_SWITCH = 1e-8
GAMMA_LARGE_SWITCH = 1e8
MAX_ITERATIONS = 200
_TINY = 1e-300
_ONE_UP = math.nextafter(1.0, 2.0)


@dataclass(frozen=True)
class UnitSystem:
    """Values of hbar and k_B used by every physical formula."""

    hbar: float = 1.0
    k_boltzmann: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "k_boltzmann"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")

    def temperature(self, beta: float) -> float:
        return 1.0 / (self.k_boltzmann * beta)


@dataclass(frozen=True)
class GInverse:
    """Root of ``g(value) = y`` with solver diagnostics."""

    y: float
    value: float
    iterations: int
    residual: float


@dataclass(frozen=True)
class GammaEval:
    """Gamma(x) with the inverse it was built from.

    ``excess`` is Gamma - 1 computed without cancellation; ``gamma`` itself is
    rounded up to the first double above 1 once the excess drops below an ulp.
    """

    x: float
    gamma: float
    g_inv: float
    iterations: int
    residual: float
    excess: float


@dataclass(frozen=True)
class BoundValue:
    """The thermal lower bound on dx*dp at one state."""

    value: float
    gamma: GammaEval
    r: float
    x_arg: float
    wavelength: float


def _check_nonneg(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be finite and nonnegative, got {x!r}")
    return arr


def g(x: ArrayLike) -> ArrayLike:
    """Evaluate ``x tanh(x/2)`` for nonnegative ``x`` (scalar or array)."""
    arr = _check_nonneg(x)
    small = arr < G_SERIES_SWITCH
    x2 = arr * arr
    series = x2 * (0.5 - x2 * (1.0 / 24.0 - x2 / 240.0))
    out = np.where(small, series, arr * np.tanh(0.5 * arr))
    # Once tanh(x/2) rounds to 1 the exact value is still below x: round down.
    out = np.where((out >= arr) & (arr > 0), np.nextafter(arr, 0.0), out)
    if out.ndim == 0:
        return float(out)
    return out


def g_prime(x: float) -> float:
    """Derivative of :func:`g` for ``x >= 0``."""
    e = math.exp(-x)
    sech2 = 4.0 * e / (1.0 + e) ** 2
    return math.tanh(0.5 * x) + 0.5 * x * sech2


def solve_g(y: float, tol: float = 1e-12) -> GInverse:
    """Solve ``g(x) = y`` by safeguarded Newton iteration.

    The bracket starts at ``max(y, sqrt(2y))`` from below (both satisfy
    ``g <= y``) and at ``y + 2 + sqrt(2y)`` from above, doubled until it
    brackets. Newton steps that leave the bracket are replaced by bisection.
    Converged means ``|g(x) - y| <= tol * y``; if the bracket collapses to
    rounding level first, the looser ``tol * max(1, y)`` is accepted.
    """
    if not math.isfinite(y) or y < 0:
        raise DomainError(f"g_inverse needs a finite y >= 0, got {y!r}")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if y == 0.0:
        return GInverse(0.0, 0.0, 0, 0.0)

    root2y = math.sqrt(2.0 * y)
    lo = max(y, root2y)
    hi = y + 2.0 + root2y
    while g(hi) < y:
        hi *= 2.0
    if y < 1.0:
        x = root2y * (1.0 + y / 12.0)
    else:
        x = y * (1.0 + 2.0 * math.exp(-y))
    if not lo <= x <= hi:
        x = 0.5 * (lo + hi)

    target = tol * max(y, _TINY)
    for it in range(1, MAX_ITERATIONS + 1):
        f = g(x) - y
        if abs(f) <= target:
            return _finish(y, x, it)
        if f < 0:
            lo = x
        else:
            hi = x
        if hi - lo <= 4.0 * np.finfo(float).eps * hi:
            if abs(f) <= tol * max(1.0, y):
                return _finish(y, x, it)
            break
        step = f / g_prime(x)
        xn = x - step
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        x = xn
    raise NumericError(
        f"g_inverse({y!r}) did not converge in {MAX_ITERATIONS} iterations",
        partial=(lo, hi),
    )


def _finish(y: float, x: float, iterations: int) -> GInverse:
    # The exact root always exceeds y; keep that true after rounding.
    if x <= y:
        x = math.nextafter(y, math.inf)
    return GInverse(y, x, iterations, abs(g(x) - y))


def g_inverse(y: float, tol: float = 1e-12) -> float:
    """The inverse of :func:`g`; see :func:`solve_g` for diagnostics."""
    return solve_g(y, tol).value


def gamma_big(x: float) -> GammaEval:
    """Gamma(x) = g^-1(x)/x for ``x > 0``.

    Below 1e-8 the asymptote ``sqrt(2/x) (1 + x/12)`` is used, above 1e8 the
    excess is exponentially small and only the rounded-up value is returned.
    """
    if not (math.isfinite(x) and x > 0):
        raise DomainError(f"Gamma needs a finite x > 0, got {x!r}")
    if x < GAMMA_SMALL_SWITCH:
        k = math.sqrt(2.0 * x) * (1.0 + x / 12.0)
        gamma = k / x
        return GammaEval(x, gamma, k, 0, abs(g(k) - x), gamma - 1.0)
    if x > GAMMA_LARGE_SWITCH:
        return GammaEval(x, _ONE_UP, x, 0, 0.0, 0.0)

    sol = solve_g(x, tol=1e-15)
    k = sol.value
    if x < 1.0:
        gamma = k / x
        excess = gamma - 1.0
    else:
        # k - x = 2k/(1 + e^k) exactly, so the excess has no cancellation.
        excess = 2.0 * (k / x) / (1.0 + math.exp(k)) if k < 700 else 0.0
        gamma = 1.0 + excess
    gamma = max(gamma, _ONE_UP)
    return GammaEval(x, gamma, k, sol.iterations, sol.residual, excess)


def thermal_wavelength(mass: float, beta: float, units: UnitSystem = UnitSystem()) -> float:
    """Thermal de Broglie wavelength ``sqrt(2 pi hbar^2 beta / m)``."""
    if not (mass > 0 and math.isfinite(mass)):
        raise DomainError(f"mass must be positive, got {mass!r}")
    if not (beta > 0 and math.isfinite(beta)):
        raise DomainError(f"beta must be positive, got {beta!r}")
    return math.sqrt(2.0 * math.pi * units.hbar**2 * beta / mass)


def heisenberg_bound(units: UnitSystem = UnitSystem()) -> float:
    return 0.5 * units.hbar


def gamma_argument(delta_x: float, mass: float, beta: float, units: UnitSystem = UnitSystem()) -> float:
    """``beta hbar^2 / (2 m dx^2)``, identical to ``1/(4 pi r^2)``."""
    return beta * units.hbar**2 / (2.0 * mass * delta_x**2)


def boltzmann_bound(
    delta_x: float, mass: float, beta: float, units: UnitSystem = UnitSystem()
) -> BoundValue:
    """Lower bound ``(hbar/2) Gamma(1/(4 pi r^2))`` with ``r = dx/lambda_th``."""
    for name, value in (("delta_x", delta_x), ("mass", mass), ("beta", beta)):
        if not (math.isfinite(value) and value > 0):
            raise DomainError(f"{name} must be positive and finite, got {value!r}")
    wavelength = thermal_wavelength(mass, beta, units)
    x_arg = gamma_argument(delta_x, mass, beta, units)
    ge = gamma_big(x_arg)
    return BoundValue(
        value=0.5 * units.hbar * ge.gamma,
        gamma=ge,
        r=delta_x / wavelength,
        x_arg=x_arg,
        wavelength=wavelength,
    )
