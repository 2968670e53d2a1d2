"""Temperature sweeps of the uncertainty product against both lower bounds."""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, TextIO

import numpy as np

from .brownian import OscillatorModel, to_susceptibility_model
from .errors import DomainError
from .spectral import SpectrumGrid, ThermalState, build_p, jensen_check, moments
from .specfun import UnitSystem, boltzmann_bound, heisenberg_bound

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "beta", "temperature", "delta_x", "delta_p", "product", "heisenberg_bound",
    "boltzmann_bound", "r", "gamma_arg", "jensen_slack", "sumrule1", "sumrule2",
)
CHAIN_TOL = 1e-9
THREADS_ENV = "THERMAL_BOUND_THREADS"
_NAN = float("nan")


def log_beta_grid(beta_min: float, beta_max: float, count: int) -> tuple:
    if count == 1 and 0 < beta_min == beta_max:
        return (float(beta_min),)
    if not (0 < beta_min < beta_max and count >= 2):
        raise DomainError(f"invalid beta grid ({beta_min!r}, {beta_max!r}, {count!r})")
    return tuple(float(b) for b in np.geomspace(beta_min, beta_max, count))


@dataclass(frozen=True)
class SweepConfig:
    model: OscillatorModel = OscillatorModel()
    units: UnitSystem = UnitSystem()
    beta_grid: Sequence[float] = field(default_factory=lambda: log_beta_grid(0.02, 50.0, 200))
    rel_tol: float = 1e-11
    emit_spectra: bool = False

    def __post_init__(self):
        grid = tuple(float(b) for b in self.beta_grid)
        if not grid:
            raise DomainError("beta grid is empty")
        if any(not (math.isfinite(b) and b > 0) for b in grid):
            raise DomainError("beta grid must be positive and finite")
        if any(b2 <= b1 for b1, b2 in zip(grid, grid[1:])):
            raise DomainError("beta grid must be strictly increasing")
        if not 1e-14 < self.rel_tol < 1e-2:
            raise DomainError(f"rel_tol must lie in (1e-14, 1e-2), got {self.rel_tol!r}")
        object.__setattr__(self, "beta_grid", grid)


@dataclass(frozen=True)
class BoundReport:
    beta: float
    temperature: float
    delta_x: float
    delta_p: float
    product: float
    heisenberg: float
    boltzmann: float
    r: float
    gamma_arg: float
    jensen_slack: float
    sumrule_residuals: tuple
    mean_omega_sq: float = _NAN
    error: Optional[str] = None
    spectrum: Optional[SpectrumGrid] = field(default=None, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def bound_slack(self) -> float:
        """``(product - boltzmann) / product``."""
        return (self.product - self.boltzmann) / self.product

    @property
    def refinement(self) -> float:
        """``(boltzmann - heisenberg) / heisenberg``."""
        return (self.boltzmann - self.heisenberg) / self.heisenberg

    @classmethod
    def failed(cls, beta: float, units: UnitSystem, message: str) -> "BoundReport":
        return cls(
            beta, units.temperature(beta), _NAN, _NAN, _NAN, heisenberg_bound(units),
            _NAN, _NAN, _NAN, _NAN, (_NAN, _NAN), error=message,
        )

    def csv_row(self) -> List[str]:
        vals = (
            self.beta, self.temperature, self.delta_x, self.delta_p, self.product,
            self.heisenberg, self.boltzmann, self.r, self.gamma_arg, self.jensen_slack,
            self.sumrule_residuals[0], self.sumrule_residuals[1],
        )
        return [f"{v:.17g}" for v in vals]


@dataclass(frozen=True)
class VerificationSummary:
    worst_bound_slack: float
    worst_refinement: float
    passed: bool
    points: int
    failed_points: int
    warnings: tuple = ()

    def lines(self) -> List[str]:
        out = [
            f"points: {self.points} (failed: {self.failed_points})",
            f"min (product - boltzmann)/product: {self.worst_bound_slack:.6g}",
            f"min (boltzmann - heisenberg)/heisenberg: {self.worst_refinement:.6g}",
        ]
        out += [f"warning: {w}" for w in self.warnings]
        out.append("PASS" if self.passed else "FAIL")
        return out


def evaluate_point(
    model: OscillatorModel,
    beta: float,
    units: UnitSystem = UnitSystem(),
    rel_tol: float = 1e-11,
    emit_spectrum: bool = False,
) -> BoundReport:
    """All quantities of one sweep row at inverse temperature ``beta``."""
    state = ThermalState(beta, units)
    sm = to_susceptibility_model(model)
    summary = moments(sm, state, rel_tol)
    delta_x = math.sqrt(summary.var_x)
    delta_p = math.sqrt(summary.var_p)
    bound = boltzmann_bound(delta_x, model.mass, beta, units)
    jensen = jensen_check(summary, state)
    spectrum = None
    if emit_spectrum:
        spectrum = build_p(sm, state, rel_tol)[0].detached()
    return BoundReport(
        beta=beta,
        temperature=units.temperature(beta),
        delta_x=delta_x,
        delta_p=delta_p,
        product=delta_x * delta_p,
        heisenberg=heisenberg_bound(units),
        boltzmann=bound.value,
        r=bound.r,
        gamma_arg=bound.x_arg,
        jensen_slack=jensen.slack,
        sumrule_residuals=(summary.first_sum_rule, summary.second_sum_rule),
        mean_omega_sq=summary.mean_omega_sq,
        spectrum=spectrum,
    )


def _point_task(args) -> BoundReport:
    model, beta, units, rel_tol, emit = args
    try:
        return evaluate_point(model, beta, units, rel_tol, emit)
    except (ArithmeticError, ValueError) as exc:
        log.warning("beta=%g failed: %s", beta, exc)
        return BoundReport.failed(beta, units, f"{type(exc).__name__}: {exc}")


def workers_from_env() -> int:
    """Worker count from ``THERMAL_BOUND_THREADS`` (unset or 0 means all cores)."""
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise DomainError(f"{THREADS_ENV} must be >= 0, got {n}")
    return n if n > 0 else (os.cpu_count() or 1)


def run_sweep(config: SweepConfig, workers: int = 1) -> List[BoundReport]:
    """One report per beta in grid order; failures are recorded, not raised."""
    tasks = [
        (config.model, beta, config.units, config.rel_tol, config.emit_spectra)
        for beta in config.beta_grid
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            reports = list(pool.map(_point_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        reports = [_point_task(t) for t in tasks]
    if all(not r.ok for r in reports):
        raise ArithmeticError(f"every sweep point failed; first error: {reports[0].error}")
    return reports


def verify_chain(reports: Sequence[BoundReport]) -> VerificationSummary:
    """Check product >= Boltzmann bound >= Heisenberg bound over a sweep.

    Fails on any errored point. A product that grows with beta is only
    reported as a warning.
    """
    if not reports:
        raise DomainError("verify_chain needs at least one report")
    good = [r for r in reports if r.ok]
    warnings = []
    if good:
        worst_slack = min(r.bound_slack for r in good)
        worst_ref = min(r.refinement for r in good)
    else:
        worst_slack = worst_ref = _NAN
    ordered = sorted(good, key=lambda r: r.beta)
    rises = [b.beta for a, b in zip(ordered, ordered[1:]) if b.product > a.product]
    if rises:
        warnings.append(f"product increases with beta at {len(rises)} point(s), first beta={rises[0]:.6g}")
    if good:
        worst_sum = max(max(abs(s) for s in r.sumrule_residuals) for r in good)
        if worst_sum > 1e-7:
            warnings.append(f"sum-rule residual {worst_sum:.3g} exceeds 1e-7")
        # mean_omega_sq is not stored in CSV, so reparsed reports skip this.
        jensen = [r.jensen_slack / r.mean_omega_sq for r in good if not math.isnan(r.mean_omega_sq)]
        worst_jensen = min(jensen, default=0.0)
        if worst_jensen < -CHAIN_TOL:
            warnings.append(f"Jensen slack {worst_jensen:.3g} below -1e-9")
    failed = len(reports) - len(good)
    passed = failed == 0 and worst_slack >= -CHAIN_TOL and worst_ref >= 0
    return VerificationSummary(worst_slack, worst_ref, passed, len(reports), failed, tuple(warnings))


def write_csv(reports: Iterable[BoundReport], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        writer.writerow(r.csv_row())


def read_csv(stream: TextIO) -> List[BoundReport]:
    """Parse a sweep CSV back into reports (rows with NaN are marked failed)."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise DomainError(f"unexpected sweep CSV header: {header!r}")
    reports = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(CSV_COLUMNS):
            raise DomainError(f"line {lineno}: expected {len(CSV_COLUMNS)} fields")
        try:
            v = [float(x) for x in row]
        except ValueError as exc:
            raise DomainError(f"line {lineno}: {exc}") from None
        error = "missing values" if any(math.isnan(x) for x in v[2:9]) else None
        reports.append(BoundReport(
            beta=v[0], temperature=v[1], delta_x=v[2], delta_p=v[3], product=v[4],
            heisenberg=v[5], boltzmann=v[6], r=v[7], gamma_arg=v[8], jensen_slack=v[9],
            sumrule_residuals=(v[10], v[11]), error=error,
        ))
    return reports
