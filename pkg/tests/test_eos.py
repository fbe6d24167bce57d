import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from rkfiltration.eos import (
    V_CRITICAL_EXACT,
    DomainError,
    GasModel,
    GasParams,
    from_reduced,
    to_reduced,
)


def test_potential_hand_values(gas):
    d = gas.potential(2.0, 1.0)
    assert d.phi == pytest.approx(-math.log(2.0 / 3.0), abs=1e-12)
    assert d.phi_v == pytest.approx(5.0 / 6.0, abs=1e-12)


@pytest.mark.parametrize("v,T", [(1.3, 0.2), (2.0, 1.0), (7.5, 0.05), (40.0, 3.0)])
def test_analytic_partials_match_finite_differences(gas, v, T):
    d = gas.potential(v, T)
    h = 1e-6
    fd = lambda f, x: (f(x + h) - f(x - h)) / (2 * h)
    assert d.phi_vT == pytest.approx(fd(lambda t: gas.potential(v, t).phi_v, T), rel=1e-7, abs=1e-7)
    assert d.phi_v == pytest.approx(fd(lambda s: gas.potential(s, T).phi, v), rel=1e-7)
    assert d.phi_T == pytest.approx(fd(lambda t: gas.potential(v, t).phi, T), rel=1e-7)
    assert d.phi_vv == pytest.approx(fd(lambda s: gas.potential(s, T).phi_v, v), rel=1e-6)
    assert d.phi_TT == pytest.approx(fd(lambda t: gas.potential(v, t).phi_T, T), rel=1e-6)
    assert d.phi_vvv == pytest.approx(fd(lambda s: gas.potential(s, T).phi_vv, v), rel=1e-5)


def test_state_hand_values(gas):
    s = gas.state(2.0, 1.0)
    assert s.p == pytest.approx(5.0 / 6.0, abs=1e-12)
    assert s.e == pytest.approx(1.5 + 1.5 * math.log(2.0 / 3.0), abs=1e-12)
    assert s.sigma == pytest.approx(0.5 * math.log(2.0 / 3.0), abs=1e-12)
    d = gas.potential(2.0, 1.0)
    assert s.gamma == pytest.approx(2.0 * d.phi_v - d.phi, abs=1e-12)


@pytest.mark.parametrize("v,T", [(1.0, 1.0), (0.5, 1.0), (2.0, 0.0), (2.0, -1.0)])
def test_domain_errors(gas, v, T):
    with pytest.raises(DomainError):
        gas.state(v, T)


def test_entropy_gauge_differs_by_half_n(gas):
    rng = np.random.default_rng(3)
    v = 1.0 + rng.uniform(0.01, 50, 200)
    T = rng.uniform(0.01, 5, 200)
    d = gas.potential(v, T)
    assert np.allclose(d.phi + T * d.phi_T - gas.entropy(v, T), 1.5, atol=1e-12)


def test_ideal_gas_limit(gas):
    for T in (0.5, 1.0, 3.0):
        v = 1e8
        assert gas.pressure(v, T) * v / T == pytest.approx(1.0, rel=1e-7)


def test_reduced_scaling_identity_for_unit_constants():
    vals = (0.3, 1.7, 2.5, -0.4, 0.2)
    assert to_reduced(*vals, GasParams()) == pytest.approx(vals)


def test_reduced_scaling_round_trip():
    gp = GasParams(a=2.0, b=0.5, R=8.314)
    vals = (1.0, 1.0, 2.0, 1.0, 0.0)
    assert from_reduced(*to_reduced(*vals, gp), gp) == pytest.approx(vals, abs=1e-12)


def test_scaled_state_satisfies_physical_equation():
    # Methane-like Redlich-Kwong constants from critical data (SI, per mol).
    R, Tc, pc = 8.314462618, 190.56, 4.599e6
    a = 0.42748 * R**2 * Tc**2.5 / pc
    b = 0.08664 * R * Tc / pc
    gas = GasModel(GasParams(n=3, a=a, b=b, R=R))
    s = gas.state_physical(2.5, 0.4)
    assert s.v == pytest.approx(b * 2.5, rel=1e-14)
    p_rk = R * s.T / (s.v - b) - a / (math.sqrt(s.T) * s.v * (s.v + b))
    assert s.p == pytest.approx(p_rk, rel=1e-12)
    e_rk = 1.5 * R * s.T + 3 * a / (2 * b * math.sqrt(s.T)) * math.log(s.v / (s.v + b))
    assert s.e == pytest.approx(e_rk, rel=1e-12)


def test_kappa(gas):
    k = gas.kappa(2.0, 1.0)
    assert k.k_vv == pytest.approx(-31.0 / 36.0, abs=1e-14)
    expected_tt = -(1.5 + 0.75 * math.log(1.5))
    assert k.k_TT == pytest.approx(expected_tt, abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(v=st.floats(1.0 + 1e-6, 1e6), T=st.floats(1e-4, 1e4))
def test_kappa_TT_negative_everywhere(v, T):
    assert GasModel().kappa(v, T).k_TT < 0


@settings(max_examples=200, deadline=None)
@given(v=st.floats(1.001, 1e4), T=st.floats(1e-3, 1e3))
def test_kappa_vv_sign_matches_factored_numerator(v, T):
    k = GasModel().kappa(v, T).k_vv
    num = v**2 * (v + 1) ** 2 * T**1.5 - (v - 1) ** 2 * (2 * v + 1)
    if abs(num) > 1e-9 * v**4 * max(1.0, T**1.5):
        assert np.sign(k) == -np.sign(num)


def test_spinodal_closed_form_values(gas):
    assert gas.spinodal_T(2.0) == pytest.approx((5.0 / 36.0) ** (2.0 / 3.0), abs=1e-15)
    assert gas.spinodal_T(2.0) == pytest.approx(0.26819, abs=1e-5)
    assert gas.spinodal_T(1.0 + 1e-8) < 1e-10
    assert gas.kappa(2.0, gas.spinodal_T(2.0)).k_vv == pytest.approx(0.0, abs=1e-12)


def test_spinodal_factorisation():
    for v in np.linspace(1.1, 30, 25):
        assert 2 * v**3 - 3 * v**2 + 1 == pytest.approx((v - 1) ** 2 * (2 * v + 1), rel=1e-13)


def test_applicability(gas):
    assert gas.is_applicable(2.0, 1.0) is True
    assert gas.is_applicable(2.0, 0.1) is False
    T_sp = gas.spinodal_T(3.0)
    # Strict inequality: exactly on the spinodal is not applicable (to rounding).
    assert gas.is_applicable(3.0, T_sp * (1 + 1e-12)) is True
    assert gas.is_applicable(3.0, T_sp * (1 - 1e-12)) is False


@settings(max_examples=200, deadline=None)
@given(v=st.floats(1.01, 100), ratio=st.floats(0.05, 20))
def test_applicable_exactly_above_spinodal(v, ratio):
    gas = GasModel()
    if abs(ratio - 1) < 1e-9:
        return
    assert gas.is_applicable(v, ratio * gas.spinodal_T(v)) == (ratio > 1)


def test_critical_point(gas):
    cp = gas.critical_point
    assert cp.v_c == pytest.approx(V_CRITICAL_EXACT, abs=1e-8)
    assert cp.T_c == pytest.approx(gas.spinodal_T(cp.v_c), abs=1e-10)
    assert cp.T_c == pytest.approx(0.345, abs=1e-3)
    d = gas.potential(cp.v_c, cp.T_c)
    assert abs(d.phi_vv) < 1e-10 and abs(d.phi_vvv) < 1e-10
    assert cp.p_c == pytest.approx(gas.state(cp.v_c, cp.T_c).p)


def test_critical_point_is_spinodal_maximum(gas):
    res = minimize_scalar(lambda v: -gas.spinodal_T(v), bounds=(1.5, 10), method="bounded", options={"xatol": 1e-10})
    assert res.x == pytest.approx(gas.critical_point.v_c, abs=1e-6)


def test_state_accepts_arrays(gas):
    v = np.array([1.5, 2.0, 3.0])
    T = np.array([0.5, 1.0, 2.0])
    p = gas.pressure(v, T)
    assert p.shape == (3,)
    assert p[1] == pytest.approx(5.0 / 6.0)


def test_gas_params_validation():
    with pytest.raises(ValueError):
        GasParams(n=0.5)
    with pytest.raises(ValueError):
        GasParams(a=-1.0)
