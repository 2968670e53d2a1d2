"""Adaptive integration over the half-line for spectral integrands.

The integrand is assumed smooth on (0, inf), to approach a known constant at
0 and to decay like ``A / w**k`` for large ``w``. The finite part is done by
globally adaptive Gauss-Kronrod (7/15) bisection; beyond a cutoff that is
doubled until negligible, the algebraic tail is added in closed form.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, EvaluatorError, NumericError

# QUADPACK qk15 abscissae and weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes.
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1:7:2] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[9:15:2] = _WG[2::-1]
KRONROD_NODES = _NODES

DEFAULT_BUDGET = 10**6
_TINY = 1e-300


@dataclass(frozen=True)
class IntegrandSpec:
    """A half-line integrand plus what is known about its endpoints.

    ``evaluator`` must accept a float ndarray and return one of equal shape.
    ``tail_integral``, if given, replaces the algebraic tail formula and maps
    a cutoff ``w`` to the integral over ``[w, inf)``.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    zero_limit: float
    tail_exponent: float
    tail_coefficient: float
    tail_start: float
    breakpoints: Sequence[float] = ()
    tail_integral: Optional[Callable[[float], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.tail_integral is None and not self.tail_exponent > 1:
            raise DomainError(f"tail_exponent must exceed 1, got {self.tail_exponent!r}")
        if not (self.tail_start > 0 and math.isfinite(self.tail_start)):
            raise DomainError(f"tail_start must be positive, got {self.tail_start!r}")

    def tail(self, cutoff: float) -> float:
        if self.tail_integral is not None:
            return float(self.tail_integral(cutoff))
        k = self.tail_exponent
        return self.tail_coefficient / ((k - 1.0) * cutoff ** (k - 1.0))


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    tail_contribution: float
    cutoff: float = math.inf


class _Counter:
    def __init__(self, spec: IntegrandSpec, budget: int):
        self.spec = spec
        self.budget = budget
        self.count = 0

    def __call__(self, w: np.ndarray) -> np.ndarray:
        self.count += w.size
        with np.errstate(all="ignore"):
            out = np.asarray(self.spec.evaluator(w), dtype=float)
        bad = ~np.isfinite(out)
        if bad.any():
            raise EvaluatorError("integrand is not finite", float(w[bad][0]))
        return out


def gauss_kronrod(f: Callable[[np.ndarray], np.ndarray], a: float, b: float):
    """One 15-point Kronrod panel: (estimate, |K15 - G7|)."""
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    fx = f(center + half * KRONROD_NODES)
    k = half * float(KRONROD_WEIGHTS @ fx)
    gs = half * float(GAUSS_WEIGHTS @ fx)
    return k, abs(k - gs)


def _zero_neighbourhood(f: _Counter, spec: IntegrandSpec, first: float, rel_tol: float) -> float:
    """Largest eps (by halving) with |f(eps) - zero_limit| <= rel_tol * scale."""
    z = spec.zero_limit
    probe = f(np.array([first * 0.5, first * 0.25, first * 0.125]))
    scale = max(abs(z), float(np.max(np.abs(probe))), _TINY)
    eps = first * 1e-2
    for _ in range(1000):
        if eps < 1e-280:
            break
        val = float(f(np.array([eps]))[0])
        if abs(val - z) <= rel_tol * scale:
            return eps
        eps *= 0.5
    return eps


def integrate_halfline(
    spec: IntegrandSpec,
    rel_tol: float = 1e-10,
    max_evaluations: int = DEFAULT_BUDGET,
) -> QuadratureResult:
    """Integrate ``spec.evaluator`` over ``[0, inf)`` to relative ``rel_tol``.

    Raises :class:`NumericError` (with the partial result) if the evaluation
    budget runs out and :class:`EvaluatorError` on non-finite samples.
    """
    if not 1e-14 < rel_tol < 1e-2:
        raise DomainError(f"rel_tol must lie in (1e-14, 1e-2), got {rel_tol!r}")
    f = _Counter(spec, max_evaluations)

    bps = sorted(b for b in spec.breakpoints if 0 < b < spec.tail_start)
    first = bps[0] if bps else spec.tail_start
    eps0 = _zero_neighbourhood(f, spec, first, rel_tol)
    head = spec.zero_limit * eps0

    points = {eps0, spec.tail_start}
    points.update(b for b in bps if b > eps0)
    p = spec.tail_start * 0.5
    while p > eps0:
        points.add(p)
        p *= 0.5
    points = sorted(points)

    heap: list = []
    values: dict = {}
    running = [0.0, 0.0]

    def add(a, b):
        v, e = gauss_kronrod(f, a, b)
        values[(a, b)] = (v, e)
        running[0] += v
        running[1] += e
        heapq.heappush(heap, (-e, a, b))

    def remove(a, b):
        v, e = values.pop((a, b))
        running[0] -= v
        running[1] -= e
        return v, e

    def resum():
        running[0] = math.fsum(v for v, _ in values.values())
        running[1] = math.fsum(e for _, e in values.values())

    for a, b in zip(points[:-1], points[1:]):
        add(a, b)

    cutoff = spec.tail_start
    while True:
        resum()
        tail = spec.tail(cutoff)
        while running[1] > 0.5 * rel_tol * max(abs(running[0] + head + tail), _TINY):
            if f.count >= max_evaluations:
                resum()
                raise NumericError(
                    f"quadrature budget of {max_evaluations} evaluations exhausted",
                    partial=QuadratureResult(running[0] + head + tail, running[1], f.count, tail, cutoff),
                )
            if not heap:
                break
            _, a, b = heapq.heappop(heap)
            mid = 0.5 * (a + b)
            if not a < mid < b:
                # Rounding-level panel: freeze it with its current estimate.
                v, _ = remove(a, b)
                values[(a, b)] = (v, 0.0)
                running[0] += v
                continue
            remove(a, b)
            add(a, mid)
            add(mid, b)
        resum()
        total, err = running
        value = total + head + tail
        if abs(tail) <= 0.5 * rel_tol * max(abs(value), _TINY):
            break
        add(cutoff, 2.0 * cutoff)
        cutoff *= 2.0

    bound_head = rel_tol * abs(spec.zero_limit) * eps0
    return QuadratureResult(
        value=total + head + tail,
        abs_error_estimate=err + bound_head,
        evaluations=f.count,
        tail_contribution=tail,
        cutoff=cutoff,
    )
