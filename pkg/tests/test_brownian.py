import math

import numpy as np
import pytest
import sympy as sp

from thermal_bound.brownian import (
    OscillatorModel, drude_friction, im_susceptibility, matsubara_var_p, matsubara_var_x,
    susceptibility, to_susceptibility_model, undamped_var_p, undamped_var_x,
)
from thermal_bound.errors import DomainError, NumericError
from thermal_bound.spectral import ThermalState, variance_p, variance_x
from thermal_bound.specfun import UnitSystem

REFERENCE = OscillatorModel(mass=1.0, omega0=1.0, eta=10.0, zeta=10.0)
BETAS = (0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 50.0)
COUPLINGS = (10.0, 1e-6)


class TestFriction:
    def test_static_value(self):
        m = OscillatorModel(eta=3.0, zeta=2.0, omega0=1.5)
        assert drude_friction(m, 0.0) == pytest.approx(3.0 * 1.5 / 2.0)
        assert drude_friction(m, 0.0).imag == 0.0

    def test_reference_configuration_static(self):
        assert drude_friction(REFERENCE, 0.0) == pytest.approx(REFERENCE.omega0)

    def test_symmetry_and_positivity(self):
        w = np.geomspace(1e-3, 1e3, 200)
        gp, gm = drude_friction(REFERENCE, w), drude_friction(REFERENCE, -w)
        np.testing.assert_allclose(gp.real, gm.real, rtol=1e-15)
        np.testing.assert_allclose(gp.imag, -gm.imag, rtol=1e-15)
        assert np.all(gp.real > 0)

    def test_decay(self):
        w = 1e6
        assert abs(drude_friction(REFERENCE, w)) * w == pytest.approx(REFERENCE.eta * REFERENCE.omega0, rel=1e-9)


class TestSusceptibility:
    def test_static(self):
        m = OscillatorModel(mass=2.0, omega0=3.0)
        assert susceptibility(m, 0.0) == pytest.approx(1 / (2.0 * 9.0))
        assert susceptibility(m, 0.0).imag == 0.0

    def test_undamped_value(self):
        m = OscillatorModel(mass=2.0, omega0=3.0, eta=0.0)
        assert susceptibility(m, 1.5) == pytest.approx(4 / (3 * 2.0 * 9.0))

    def test_undamped_pole(self):
        with pytest.raises(NumericError):
            susceptibility(OscillatorModel(eta=0.0), 1.0)

    def test_real_formula_matches_complex(self):
        w = np.linspace(-30, 30, 1201)
        for model in (REFERENCE, OscillatorModel(mass=0.3, omega0=2.0, eta=0.5, zeta=4.0)):
            np.testing.assert_allclose(im_susceptibility(model, w), susceptibility(model, w).imag,
                                       rtol=1e-12, atol=1e-300)

    def test_symmetry(self):
        w = np.geomspace(1e-3, 1e3, 300)
        chi_p, chi_m = susceptibility(REFERENCE, w), susceptibility(REFERENCE, -w)
        np.testing.assert_allclose(chi_p.real, chi_m.real, rtol=1e-14)
        np.testing.assert_allclose(chi_p.imag, -chi_m.imag, rtol=1e-14)
        assert np.all(chi_p.imag > 0)

    def test_tail(self):
        w = 1e5
        assert im_susceptibility(REFERENCE, w) * w**5 == pytest.approx(REFERENCE.tail_coefficient, rel=1e-6)

    def test_tail_symbolic(self):
        w, m, om, e, z = sp.symbols("omega m Omega eta zeta", positive=True)
        gamma = sp.I * e * om / (w + sp.I * z)
        chi = (1 / m) / (om**2 - w**2 - sp.I * w * gamma)
        im = sp.simplify(sp.im(sp.expand_complex(chi)))
        assert sp.simplify(sp.limit(im * w**5, w, sp.oo) - e * om * z / m) == 0
        assert sp.simplify(sp.limit(im / w, w, 0) - e * om / (z * m * om**4)) == 0


class TestAdapter:
    def test_features_from_poles(self):
        sm = to_susceptibility_model(OscillatorModel(eta=1e-6))
        centers = sorted(c for c, _ in sm.features)
        assert centers[-1] == pytest.approx(1.0, rel=1e-6)

    @pytest.mark.parametrize("scale", [0.1, 1.0, 10.0])
    def test_odd_symmetry(self, scale):
        sm = to_susceptibility_model(REFERENCE)
        w = np.array([scale])
        assert sm(-w)[0] == -sm(w)[0]

    def test_passivity(self):
        sm = to_susceptibility_model(REFERENCE)
        assert sm.check_passivity(np.geomspace(1e-6, 1e6, 500))
        assert sm.check_symmetry(np.geomspace(1e-6, 1e6, 500)) < 1e-15

    def test_slope(self):
        sm = to_susceptibility_model(REFERENCE)
        w = 1e-8 * REFERENCE.omega0
        assert sm(np.array([w]))[0] / w == pytest.approx(sm.zero_slope, rel=1e-6)
        assert sm.richardson_slope() == pytest.approx(sm.zero_slope, rel=1e-8)

    def test_rejects_undamped(self):
        with pytest.raises(DomainError):
            to_susceptibility_model(OscillatorModel(eta=0.0))

    @pytest.mark.parametrize("field", ["mass", "omega0", "zeta"])
    def test_model_validation(self, field):
        with pytest.raises(DomainError, match=field):
            OscillatorModel(**{field: 0.0})
        with pytest.raises(DomainError):
            OscillatorModel(eta=-1.0)


class TestMatsubara:
    @pytest.mark.parametrize("beta", [0.1, 1.0, 10.0])
    @pytest.mark.parametrize("hbar", [1.0, 0.5])
    def test_undamped_closed_form(self, beta, hbar):
        m = OscillatorModel(mass=1.7, omega0=0.6, eta=0.0)
        st = ThermalState(beta, UnitSystem(hbar=hbar))
        assert matsubara_var_x(m, st) == pytest.approx(undamped_var_x(m, st), rel=1e-12)
        assert matsubara_var_p(m, st) == pytest.approx(undamped_var_p(m, st), rel=1e-12)

    @pytest.mark.parametrize("eta", [10.0, 1.0, 1e-6])
    def test_classical_limit(self, eta):
        m = OscillatorModel(eta=eta)
        beta = 0.01
        st = ThermalState(beta)
        assert beta * m.mass * m.omega0**2 * matsubara_var_x(m, st) == pytest.approx(1.0, abs=1e-3)
        assert beta * matsubara_var_p(m, st) / m.mass == pytest.approx(1.0, abs=1e-3)

    def test_deterministic(self):
        st = ThermalState(2.0)
        assert matsubara_var_x(REFERENCE, st) == matsubara_var_x(REFERENCE, st)

    def test_non_convergence(self, monkeypatch):
        import thermal_bound.brownian as br

        monkeypatch.setattr(br, "MATSUBARA_MAX", 64)
        with pytest.raises(NumericError):
            br.matsubara_var_x(REFERENCE, ThermalState(50.0), rel_tol=1e-15)


@pytest.mark.parametrize("eta", COUPLINGS)
@pytest.mark.parametrize("beta", BETAS)
def test_quadrature_matches_matsubara(beta, eta):
    m = OscillatorModel(eta=eta)
    st = ThermalState(beta)
    sm = to_susceptibility_model(m)
    assert variance_x(sm, st).value == pytest.approx(matsubara_var_x(m, st), rel=1e-8)
    assert variance_p(sm, st).value == pytest.approx(matsubara_var_p(m, st), rel=1e-8)


def test_routes_agree_with_units():
    m = OscillatorModel(mass=0.4, omega0=2.5, eta=3.0, zeta=7.0)
    st = ThermalState(0.8, UnitSystem(hbar=0.3, k_boltzmann=2.0))
    sm = to_susceptibility_model(m)
    assert variance_x(sm, st).value == pytest.approx(matsubara_var_x(m, st), rel=1e-8)
    assert variance_p(sm, st).value == pytest.approx(matsubara_var_p(m, st), rel=1e-8)


def test_undamped_quantum_limit():
    m = OscillatorModel(eta=1e-6)
    sm = to_susceptibility_model(m)
    for beta in (0.1, 1.0, 10.0):
        st = ThermalState(beta)
        prod = variance_x(sm, st).value * variance_p(sm, st).value
        assert prod == pytest.approx(0.25 / math.tanh(beta / 2) ** 2, rel=1e-4)


def test_classical_equipartition_from_quadrature():
    st = ThermalState(0.01)
    sm = to_susceptibility_model(REFERENCE)
    assert 0.01 * variance_x(sm, st).value == pytest.approx(1.0, abs=1e-3)
    assert 0.01 * variance_p(sm, st).value == pytest.approx(1.0, abs=1e-3)
