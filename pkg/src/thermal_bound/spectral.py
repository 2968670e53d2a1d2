"""Equilibrium position spectrum and its normalized distributions.

Given ``Im chi(w)`` of a coordinate, the fluctuation-dissipation theorem
fixes the correlation spectrum::

    C(w) = hbar Im chi(w) / (1 - exp(-beta hbar w))

``P = C / (pi var_x)`` is a probability density on the full frequency line
and ``Q(w) = (1 + exp(-beta hbar w)) P(w)`` one on the half-line. All
full-line integrals are folded onto ``[0, inf)`` using the odd symmetry of
``Im chi``; in particular ``C(w) + C(-w) = hbar Im chi(w) coth(beta hbar w/2)``
and ``C(w) - C(-w) = hbar Im chi(w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, TextIO, Tuple

import numpy as np

from .errors import DomainError, NumericError
from .quadrature import IntegrandSpec, QuadratureResult, integrate_halfline
from .specfun import UnitSystem, g, g_inverse, gamma_big

SMALL_X = 1e-8
GRID_POINTS = 2048
# Tail formulas need exp(-beta hbar w) negligible past the cutoff.
_THERMAL_TAIL = 40.0


@dataclass(frozen=True)
class ThermalState:
    beta: float
    units: UnitSystem = UnitSystem()

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise DomainError(f"beta must be positive and finite, got {self.beta!r}")

    @property
    def beta_hbar(self) -> float:
        return self.beta * self.units.hbar

    @property
    def temperature(self) -> float:
        return self.units.temperature(self.beta)


@dataclass(frozen=True)
class SusceptibilityModel:
    """Dissipative part of a linear response function.

    ``im_chi`` is vectorized and odd in ``w``. Its large-frequency behaviour
    ``tail_coefficient / w**tail_exponent`` and (optionally) the slope
    ``zero_slope = lim Im chi(w)/w`` are declared so integrals can treat both
    ends analytically. ``features`` lists ``(center, width)`` pairs of
    spectral peaks used to seed quadrature breakpoints.
    """

    im_chi: Callable[[np.ndarray], np.ndarray]
    mass: float
    tail_coefficient: float
    tail_exponent: float
    frequency_scale: float = 1.0
    tail_start: float = 100.0
    zero_slope: Optional[float] = None
    features: Sequence[Tuple[float, float]] = ()

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"mass must be positive, got {self.mass!r}")
        if not self.tail_exponent > 3:
            raise DomainError("Im chi must decay faster than w**-3 for a finite momentum variance")

    def __call__(self, omega):
        return self.im_chi(np.asarray(omega, dtype=float))

    def richardson_slope(self) -> float:
        """Estimate ``lim Im chi(w)/w`` from two small frequencies."""
        w1 = 1e-6 * self.frequency_scale
        w2 = 0.5 * w1
        s1 = float(self(np.array([w1]))[0]) / w1
        s2 = float(self(np.array([w2]))[0]) / w2
        # Im chi is odd, so Im chi/w has an even expansion: error O(w^2).
        return (4.0 * s2 - s1) / 3.0

    def slope(self) -> float:
        return self.zero_slope if self.zero_slope is not None else self.richardson_slope()

    def breakpoints(self, upper: float) -> tuple:
        pts = set()
        for center, width in self.features:
            width = max(width, 1e-300)
            if center > 0:
                pts.add(center)
            step = width
            while step < upper:
                for p in (center - step, center + step):
                    if 0 < p < upper:
                        pts.add(p)
                step *= 4.0
        return tuple(sorted(pts))

    def check_symmetry(self, omegas) -> float:
        """Largest |Im chi(w) + Im chi(-w)| relative to |Im chi(w)|."""
        w = np.asarray(omegas, dtype=float)
        a, b = self(w), self(-w)
        return float(np.max(np.abs(a + b) / np.maximum(np.abs(a), 1e-300)))

    def check_passivity(self, omegas) -> bool:
        w = np.asarray(omegas, dtype=float)
        return bool(np.all(self(np.abs(w)) >= 0))


@dataclass(frozen=True)
class SpectrumGrid:
    """Sampled spectrum on nonnegative frequencies.

    ``mass_integrand`` integrates to the total weight of the distribution
    (the full line for P, the half-line for Q); ``density`` evaluates the
    continuous function the samples came from.
    """

    omegas: np.ndarray
    values: np.ndarray
    tail: Tuple[float, float]
    kind: str
    density: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False, compare=False)
    mass_integrand: Optional[IntegrandSpec] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("C", "P", "Q"):
            raise DomainError(f"unknown spectrum kind {self.kind!r}")
        if len(self.omegas) != len(self.values):
            raise DomainError("omegas and values differ in length")
        if np.any(np.diff(self.omegas) <= 0) or np.any(self.omegas < 0):
            raise DomainError("omegas must be nonnegative and strictly increasing")
        if self.kind in ("P", "Q") and np.any(self.values < 0):
            raise DomainError(f"{self.kind} must be nonnegative")

    def total_mass(self, rel_tol: float = 1e-11) -> float:
        if self.mass_integrand is None:
            raise DomainError("grid carries no continuous integrand")
        return integrate_halfline(self.mass_integrand, rel_tol).value

    def detached(self) -> "SpectrumGrid":
        """Copy without the (unpicklable) continuous evaluators."""
        return SpectrumGrid(self.omegas, self.values, self.tail, self.kind)

    def write_csv(self, stream: TextIO) -> None:
        stream.write("omega,value\n")
        for w, v in zip(self.omegas, self.values):
            stream.write(f"{w:.17g},{v:.17g}\n")


@dataclass(frozen=True)
class MomentSummary:
    var_x: float
    var_p: float
    mean_omega: float
    mean_omega_sq: float
    mean_g_q: float
    beta_hbar: float
    mass: float
    hbar: float

    def __post_init__(self):
        if not (self.var_x > 0 and self.var_p > 0 and self.mean_omega_sq > 0):
            raise NumericError(f"non-positive second moments in {self!r}")

    @property
    def first_sum_rule(self) -> float:
        """``<w> 2 m var_x / hbar - 1``."""
        return self.mean_omega * 2.0 * self.mass * self.var_x / self.hbar - 1.0

    @property
    def second_sum_rule(self) -> float:
        """``<w^2> m^2 var_x / var_p - 1``."""
        return self.mean_omega_sq * self.mass**2 * self.var_x / self.var_p - 1.0

    @property
    def moment_link(self) -> float:
        """``beta hbar <w> / <g(beta hbar w)>_Q - 1``."""
        return self.beta_hbar * self.mean_omega / self.mean_g_q - 1.0


@dataclass(frozen=True)
class JensenReport:
    lhs: float
    rhs: float
    slack: float

    @property
    def relative_slack(self) -> float:
        return self.slack / self.lhs


def c_spectrum(model: SusceptibilityModel, state: ThermalState, omega):
    """Correlation spectrum C(w) from the fluctuation-dissipation theorem.

    Within ``|beta hbar w| <= 1e-8`` the Bose factor is replaced by its
    two-term series, and ``w = 0`` returns the limit ``L / beta``.
    """
    w = np.asarray(omega, dtype=float)
    x = state.beta_hbar * w
    hbar = state.units.hbar
    near_zero = np.abs(x) <= SMALL_X
    with np.errstate(all="ignore"):
        out = hbar * model(w) / -np.expm1(-x)
        out = np.where(np.isinf(x) & (x > 0), 0.0, out)
    if np.any(near_zero):
        # 1/(1 - e^-x) = 1/x + 1/2 + O(x); the exact origin takes the slope limit.
        with np.errstate(all="ignore"):
            series = hbar * model(w) * (1.0 / x + 0.5)
        series = np.where(w == 0.0, model.slope() / state.beta, series)
        out = np.where(near_zero, series, out)
    if np.any(np.isnan(out)):
        raise NumericError("susceptibility returned NaN")
    return float(out) if out.ndim == 0 else out


def _tail_start(model: SusceptibilityModel, state: ThermalState) -> float:
    return max(model.tail_start, _THERMAL_TAIL / state.beta_hbar)


def _integrand(model, state, fn, zero_limit, power) -> IntegrandSpec:
    """Integrand with tail ``A_chi * coeff / w**(k - power)``."""
    start = _tail_start(model, state)
    return IntegrandSpec(
        evaluator=fn,
        zero_limit=zero_limit,
        tail_exponent=model.tail_exponent - power,
        tail_coefficient=0.0,
        tail_start=start,
        breakpoints=model.breakpoints(start),
    )


def _with_tail(spec: IntegrandSpec, coefficient: float) -> IntegrandSpec:
    return IntegrandSpec(
        spec.evaluator, spec.zero_limit, spec.tail_exponent, coefficient,
        spec.tail_start, spec.breakpoints,
    )


def _coth_half(x):
    with np.errstate(all="ignore"):
        return 1.0 / np.tanh(0.5 * x)


def variance_x(model: SusceptibilityModel, state: ThermalState, rel_tol: float = 1e-11) -> QuadratureResult:
    """``(hbar/pi) int_0^inf Im chi(w) coth(beta hbar w/2) dw``."""
    bh, hbar = state.beta_hbar, state.units.hbar
    pref = hbar / math.pi

    def f(w):
        return pref * model(w) * _coth_half(bh * w)

    spec = _integrand(model, state, f, pref * 2.0 * model.slope() / bh, 0)
    return integrate_halfline(_with_tail(spec, pref * model.tail_coefficient), rel_tol)


def variance_p(model: SusceptibilityModel, state: ThermalState, rel_tol: float = 1e-11) -> QuadratureResult:
    """``(m^2 hbar/pi) int_0^inf w^2 Im chi(w) coth(beta hbar w/2) dw``."""
    bh, hbar = state.beta_hbar, state.units.hbar
    pref = model.mass**2 * hbar / math.pi

    def f(w):
        return pref * w * w * model(w) * _coth_half(bh * w)

    spec = _integrand(model, state, f, 0.0, 2)
    return integrate_halfline(_with_tail(spec, pref * model.tail_coefficient), rel_tol)


def frequency_grid(model: SusceptibilityModel, points: int = GRID_POINTS) -> np.ndarray:
    scale = model.frequency_scale
    return np.geomspace(1e-6 * scale, 1e4 * scale, points)


def build_p(
    model: SusceptibilityModel,
    state: ThermalState,
    rel_tol: float = 1e-11,
    omegas: Optional[np.ndarray] = None,
) -> Tuple[SpectrumGrid, float]:
    """P(w) = C(w)/(pi var_x) sampled on ``omegas``, together with var_x."""
    var_x = variance_x(model, state, rel_tol).value
    norm = 1.0 / (math.pi * var_x)

    def density(w):
        return norm * c_spectrum(model, state, w)

    def folded(w):
        return density(w) + density(-w)

    hbar = state.units.hbar
    zero = 2.0 * norm * model.slope() / state.beta
    mass_spec = _with_tail(_integrand(model, state, folded, zero, 0), norm * hbar * model.tail_coefficient)
    if omegas is None:
        omegas = frequency_grid(model)
    grid = SpectrumGrid(
        omegas=np.asarray(omegas, dtype=float),
        values=density(np.asarray(omegas, dtype=float)),
        tail=(norm * hbar * model.tail_coefficient, model.tail_exponent),
        kind="P",
        density=density,
        mass_integrand=mass_spec,
    )
    return grid, var_x


def build_q(p_grid: SpectrumGrid, state: ThermalState) -> SpectrumGrid:
    """Q(w) = (1 + exp(-beta hbar w)) P(w) on the half-line."""
    if p_grid.kind != "P":
        raise DomainError(f"build_q needs a P grid, got kind {p_grid.kind!r}")
    bh = state.beta_hbar
    weight = 1.0 + np.exp(-bh * p_grid.omegas)
    density = mass_integrand = None
    if p_grid.density is not None:
        p_density = p_grid.density

        def density(w):
            return (1.0 + np.exp(-bh * w)) * p_density(w)

        src = p_grid.mass_integrand
        if src is not None:
            mass_integrand = IntegrandSpec(
                density, src.zero_limit, src.tail_exponent, src.tail_coefficient,
                src.tail_start, src.breakpoints,
            )
    return SpectrumGrid(
        omegas=p_grid.omegas,
        values=weight * p_grid.values,
        tail=p_grid.tail,
        kind="Q",
        density=density,
        mass_integrand=mass_integrand,
    )


def detailed_balance_residual(model: SusceptibilityModel, state: ThermalState, omegas) -> float:
    """Largest ``|C(-w) - exp(-beta hbar w) C(w)| / C(w)`` over ``omegas``."""
    w = np.asarray(omegas, dtype=float)
    cp = c_spectrum(model, state, w)
    cm = c_spectrum(model, state, -w)
    return float(np.max(np.abs(cm - np.exp(-state.beta_hbar * w) * cp) / cp))


def moments(model: SusceptibilityModel, state: ThermalState, rel_tol: float = 1e-11) -> MomentSummary:
    """Position/momentum variances and the low moments of P and Q.

    The variances use the folded ``coth`` integrands; the moments of P and Q
    are integrated from ``C(+w)`` and ``C(-w)`` separately, so the sum rules
    relating the two are genuine checks of the folding.
    """
    bh, hbar = state.beta_hbar, state.units.hbar
    var_x = variance_x(model, state, rel_tol).value
    var_p = variance_p(model, state, rel_tol).value
    norm = 1.0 / (math.pi * var_x)
    a = norm * hbar * model.tail_coefficient

    def c_pm(w):
        return c_spectrum(model, state, w), c_spectrum(model, state, -w)

    def first(w):
        cp, cm = c_pm(w)
        return norm * w * (cp - cm)

    def second(w):
        cp, cm = c_pm(w)
        return norm * w * w * (cp + cm)

    def g_weighted(w):
        return norm * g(bh * w) * (1.0 + np.exp(-bh * w)) * c_spectrum(model, state, w)

    mean_omega = integrate_halfline(_with_tail(_integrand(model, state, first, 0.0, 1), a), rel_tol).value
    mean_omega_sq = integrate_halfline(_with_tail(_integrand(model, state, second, 0.0, 2), a), rel_tol).value
    mean_g_q = integrate_halfline(_with_tail(_integrand(model, state, g_weighted, 0.0, 1), bh * a), rel_tol).value
    return MomentSummary(
        var_x=var_x,
        var_p=var_p,
        mean_omega=mean_omega,
        mean_omega_sq=mean_omega_sq,
        mean_g_q=mean_g_q,
        beta_hbar=bh,
        mass=model.mass,
        hbar=hbar,
    )


def jensen_check(summary: MomentSummary, state: ThermalState) -> JensenReport:
    """Both sides of ``<w^2> >= k(beta hbar <w>)^2 / (beta hbar)^2``."""
    bh = state.beta_hbar
    lhs = summary.mean_omega_sq
    rhs = g_inverse(bh * summary.mean_omega) ** 2 / bh**2
    return JensenReport(lhs=lhs, rhs=rhs, slack=lhs - rhs)


def jensen_check_discrete(q_grid: SpectrumGrid, state: ThermalState) -> JensenReport:
    """Jensen's inequality for the trapezoid-weighted samples of Q.

    Independent of the quadrature route: any nonnegative normalized weights
    must satisfy the inequality, so a negative slack here means ``g`` or its
    inverse is broken, not the spectrum.
    """
    if q_grid.kind != "Q":
        raise DomainError("jensen_check_discrete needs a Q grid")
    w = q_grid.omegas
    dw = np.diff(w)
    weights = np.zeros_like(w)
    weights[:-1] += 0.5 * dw
    weights[1:] += 0.5 * dw
    weights = weights * q_grid.values
    weights = weights / weights.sum()
    bh = state.beta_hbar
    lhs = float(weights @ (w * w))
    mean_g = float(weights @ g(bh * w))
    rhs = g_inverse(mean_g) ** 2 / bh**2
    return JensenReport(lhs=lhs, rhs=rhs, slack=lhs - rhs)


def uncertainty_margin(summary: MomentSummary, state: ThermalState) -> float:
    """``var_x var_p / ((hbar/2) Gamma)^2 - 1``; nonnegative when the bound holds."""
    hbar = state.units.hbar
    x_arg = state.beta * hbar**2 / (2.0 * summary.mass * summary.var_x)
    bound = 0.5 * hbar * gamma_big(x_arg).gamma
    return summary.var_x * summary.var_p / bound**2 - 1.0
