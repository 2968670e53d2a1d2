"""End-to-end acceptance checks, one test per criterion.

Each test records a ``PASS``/``FAIL`` line that is printed in the pytest
terminal summary (and immediately, when run with ``-s``).
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from thermal_bound.brownian import OscillatorModel, matsubara_var_x, to_susceptibility_model
from thermal_bound.spectral import (
    ThermalState, build_p, build_q, detailed_balance_residual, jensen_check, moments, variance_x,
)
from thermal_bound.specfun import g, g_inverse, gamma_big
from thermal_bound.sweep import SweepConfig, evaluate_point, log_beta_grid, run_sweep, verify_chain

REFERENCE = OscillatorModel(mass=1.0, omega0=1.0, eta=10.0, zeta=10.0)
SHARP = OscillatorModel(mass=1.0, omega0=1.0, eta=1e-6, zeta=10.0)
MATRIX_BETAS = (0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 50.0)


def report(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_1_bound_chain():
    start = time.perf_counter()
    reports = run_sweep(SweepConfig(REFERENCE, beta_grid=log_beta_grid(0.02, 50.0, 200)), workers=1)
    elapsed = time.perf_counter() - start
    summary = verify_chain(reports)
    chain = all(r.product >= r.boltzmann * (1 - 1e-9) and r.boltzmann >= 0.5 for r in reports)
    ok = summary.passed and chain and len(reports) == 200 and elapsed < 30.0
    report(1, "product >= boltzmann >= hbar/2 over 200 betas", ok,
           f"worst slack {summary.worst_bound_slack:.3g}, worst refinement "
           f"{summary.worst_refinement:.3g}, {elapsed:.1f} s")


def test_2_low_temperature():
    b = evaluate_point(REFERENCE, 50.0).boltzmann
    report(2, "boltzmann -> hbar/2 at beta=50", abs(b - 0.5) < 0.01, f"boltzmann = {b:.12g}")


def test_3_high_temperature():
    b = evaluate_point(REFERENCE, 1.0).boltzmann
    report(3, "boltzmann separated from hbar/2 at beta=1", b - 0.5 > 0.05, f"boltzmann = {b:.12g}")


def test_4_saturation():
    worst = 0.0
    for bo in (0.1, 1.0, 10.0):
        r = evaluate_point(SHARP, bo)
        exact = 0.5 / math.tanh(bo / 2)
        worst = max(worst, abs(r.product / exact - 1), abs(r.boltzmann / r.product - 1))
    report(4, "sharp spectrum saturates the bound", worst < 1e-4, f"worst relative deviation {worst:.3g}")


def test_5_oracle_equivalence():
    start = time.perf_counter()
    worst = 0.0
    for eta in (10.0, 1e-6):
        model = OscillatorModel(eta=eta)
        sm = to_susceptibility_model(model)
        for beta in MATRIX_BETAS:
            st = ThermalState(beta)
            quad = variance_x(sm, st).value
            worst = max(worst, abs(quad / matsubara_var_x(model, st) - 1))
    elapsed = time.perf_counter() - start
    report(5, "quadrature var_x matches Matsubara sum", worst < 1e-8 and elapsed < 5.0,
           f"worst relative gap {worst:.3g}, {elapsed:.2f} s")


def _matrix_summaries():
    for eta in (10.0, 1e-6):
        sm = to_susceptibility_model(OscillatorModel(eta=eta))
        for beta in MATRIX_BETAS:
            st = ThermalState(beta)
            yield sm, st, moments(sm, st)


@pytest.fixture(scope="module")
def summaries():
    return list(_matrix_summaries())


def test_6_sum_rules(summaries):
    worst = max(max(abs(s.first_sum_rule), abs(s.second_sum_rule)) for _, _, s in summaries)
    report(6, "first and second sum rules", worst < 1e-7, f"worst residual {worst:.3g}")


def test_7_distribution_identities(summaries):
    norm = balance = link = 0.0
    jensen_ok = True
    for sm, st, s in summaries:
        p, _ = build_p(sm, st)
        q = build_q(p, st)
        norm = max(norm, abs(p.total_mass() - 1), abs(q.total_mass() - 1))
        balance = max(balance, detailed_balance_residual(sm, st, p.omegas))
        link = max(link, abs(s.moment_link))
        j = jensen_check(s, st)
        jensen_ok &= j.slack >= -1e-9 * s.mean_omega_sq
    ok = norm < 1e-9 and balance < 1e-12 and link < 1e-7 and jensen_ok
    report(7, "normalization, detailed balance, moment link, Jensen", ok,
           f"norm {norm:.3g}, balance {balance:.3g}, link {link:.3g}, jensen ok={jensen_ok}")


def test_8_special_functions():
    ys = np.geomspace(1e-8, 1e3, 2001)
    round_trip = max(abs(g(g_inverse(float(y))) - y) / max(1.0, y) for y in ys)
    xs = np.geomspace(1e-300, 1e6, 2001)
    above_one = all(gamma_big(float(x)).gamma > 1.0 for x in xs)
    at_large = gamma_big(1e6).gamma
    asym = abs(gamma_big(1e-6).gamma / math.sqrt(2 / 1e-6) - 1)
    ok = round_trip <= 1e-12 and above_one and at_large < 1.01 and asym < 1e-3
    report(8, "special functions", ok,
           f"round trip {round_trip:.3g}, Gamma>1 {above_one}, Gamma(1e6)={at_large!r}, asymptote gap {asym:.3g}")


def test_9_classical_limit():
    beta = 0.01
    r = evaluate_point(REFERENCE, beta)
    xs = beta * REFERENCE.mass * REFERENCE.omega0**2 * r.delta_x**2
    ps = beta * r.delta_p**2 / REFERENCE.mass
    ok = abs(xs - 1) < 1e-3 and abs(ps - 1) < 1e-3
    report(9, "equipartition at beta hbar Omega = 0.01", ok, f"position {xs:.8g}, momentum {ps:.8g}")
