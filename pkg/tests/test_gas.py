import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nozzleflow.gas import (
    VACUUM,
    DomainError,
    GasConstants,
    GasState,
    char_speeds,
    entropy_production,
    from_invariants,
    hugoniot_dv,
    mech_entropy,
    pressure,
    rh_residual,
    shock_speed_S,
    to_invariants,
    wave_curve,
)

# mpmath, 40 digits: v on the 1-shock curve from (1, 0) at rho = 2, gamma = 5/3
S1_V_AT_2 = -0.80773797185777993165


def test_gamma_range():
    with pytest.raises(DomainError):
        GasConstants(1.0)
    with pytest.raises(DomainError):
        GasConstants(1.7)
    assert GasConstants(1.4).theta == pytest.approx(0.2)


def test_invariants_examples(gas):
    assert to_invariants(GasState(1.0, 0.0), gas) == pytest.approx((-3.0, 3.0), abs=1e-15)
    assert to_invariants(VACUUM, gas) == (0.0, 0.0)
    z, w = to_invariants(GasState(0.512, 0.512 * 0.3), gas)
    assert (z, w) == pytest.approx((-2.1, 2.7), abs=1e-14)


def test_negative_density_rejected(gas):
    with pytest.raises(DomainError):
        to_invariants(GasState(-1e-3, 0.0), gas)


def test_from_invariants_examples(gas):
    u = from_invariants((-3.0, 3.0), gas)
    assert u.rho == pytest.approx(1.0, rel=1e-15) and u.m == pytest.approx(0.0, abs=1e-15)
    assert from_invariants((0.7, 0.7), gas) == VACUUM
    u = from_invariants((-2.1, 2.7), gas)
    assert u.rho == pytest.approx(0.512, rel=1e-14)
    assert u.v == pytest.approx(0.3, rel=1e-14)
    with pytest.raises(DomainError):
        from_invariants((1.0, 0.5), gas)


def test_char_speeds_examples(gas):
    assert char_speeds(GasState(1.0, 0.0), gas) == pytest.approx((-1.0, 1.0))
    assert char_speeds(VACUUM, gas) == (0.0, 0.0)
    assert char_speeds(GasState(0.512, 0.512 * 0.3), gas) == pytest.approx((-0.5, 1.1), abs=1e-14)


def test_mech_entropy_examples(gas):
    assert mech_entropy(GasState(1.0, 0.0), gas) == pytest.approx((0.9, 0.0))
    assert mech_entropy(VACUUM, gas) == (0.0, 0.0)
    assert mech_entropy(GasState(1.0, 1.0), gas).eta == pytest.approx(1.4)


def test_shock_speed_factor(gas):
    assert shock_speed_S(0.7, 0.7, gas) == pytest.approx(0.7 ** gas.theta, rel=1e-15)
    r0 = 0.9
    # no cancellation loss next to the diagonal (mpmath, 40 digits)
    assert abs(shock_speed_S(r0 + 1e-6, r0, gas) - 0.96549009978286339451) < 1e-8
    # and the gap to the diagonal value closes linearly
    gaps = [abs(shock_speed_S(r0 + d, r0, gas) - r0**gas.theta) for d in (1e-4, 1e-5, 1e-6)]
    assert gaps[1] / gaps[0] == pytest.approx(0.1, rel=1e-2)
    assert gaps[2] / gaps[1] == pytest.approx(0.1, rel=1e-2)
    # algebra check with p = rho^2 / 2, outside the physical gamma range
    g2 = SimpleNamespace(gamma=2.0, theta=0.5)
    assert shock_speed_S(2.0, 1.0, g2) == pytest.approx(math.sqrt(3.0), rel=1e-15)
    with pytest.raises(DomainError):
        shock_speed_S(0.0, 0.0, gas)


def test_shock_speed_increasing(gas):
    r = np.linspace(0.01, 5.0, 2001)
    s = [shock_speed_S(float(x), 1.3, gas) for x in r]
    assert np.all(np.diff(s) > 0.0)


def test_wave_curves(gas):
    u0 = GasState(1.0, 0.0)
    assert wave_curve(1, "rarefaction", u0, 1.0, gas) == u0
    u = wave_curve(1, "shock", u0, 2.0, gas)
    assert u.v == pytest.approx(S1_V_AT_2, rel=1e-14)
    back = wave_curve(1, "inverse_shock", u, 1.0, gas)
    assert back.rho == pytest.approx(1.0) and abs(back.m) < 1e-12
    with pytest.raises(DomainError):
        wave_curve(1, "shock", u0, 0.5, gas)
    with pytest.raises(DomainError):
        wave_curve(2, "rarefaction", u0, 0.5, gas)
    with pytest.raises(DomainError):
        wave_curve(3, "shock", u0, 0.5, gas)


def test_rarefaction_keeps_invariant(gas):
    u0 = GasState(1.3, 1.3 * 0.4)
    z0, w0 = to_invariants(u0, gas)
    assert to_invariants(wave_curve(1, "rarefaction", u0, 0.4, gas), gas).w == pytest.approx(w0, rel=1e-14)
    assert to_invariants(wave_curve(2, "rarefaction", u0, 2.4, gas), gas).z == pytest.approx(z0, rel=1e-14)


def test_tangency_slope(gas):
    u0 = GasState(1.0, 0.0)
    w0 = to_invariants(u0, gas).w
    d = np.geomspace(1e-3, 1e-1, 9)
    dw = [abs(to_invariants(wave_curve(1, "shock", u0, 1.0 + x, gas), gas).w - w0) for x in d]
    slope = np.polyfit(np.log(d), np.log(dw), 1)[0]
    assert 2.7 <= slope <= 3.3


def test_rh_and_entropy_on_shock_curves(gas):
    u0 = GasState(1.0, 0.2)
    for rho in (1.1, 2.0, 5.0):
        u = wave_curve(1, "shock", u0, rho, gas)
        sigma = u0.v - shock_speed_S(rho, u0.rho, gas)
        assert max(map(abs, rh_residual(sigma, u0, u, gas))) <= 1e-10
        assert entropy_production(sigma, u0, u, gas) >= -1e-12
        # the same jump run backwards is a rarefaction shock
        assert entropy_production(sigma, u, u0, gas) < 0.0
    for rho in (0.9, 0.3):
        # u0 is the left state of the 2-shock
        u = wave_curve(2, "shock", u0, rho, gas)
        sigma = u.v + shock_speed_S(u0.rho, rho, gas)
        assert max(map(abs, rh_residual(sigma, u0, u, gas))) <= 1e-10
        assert entropy_production(sigma, u0, u, gas) >= -1e-12


def test_rh_residual_basics(gas):
    u = GasState(1.0, 0.3)
    assert rh_residual(0.7, u, u, gas) == (0.0, 0.0)
    v = GasState(2.0, -0.1)
    r = rh_residual(0.5, u, v, gas)
    r2 = rh_residual(0.5 + 1e-3, u, v, gas)
    assert r != r2
    assert entropy_production(1.0, u, u, gas) == 0.0


def test_hugoniot_symmetric(gas):
    assert hugoniot_dv(2.0, 1.0, gas) == pytest.approx(hugoniot_dv(1.0, 2.0, gas), rel=1e-15)
    assert pressure(0.0, gas) == 0.0


@given(z=st.floats(-20, 20), d=st.floats(1e-6, 10.0))
def test_roundtrip(z, d):
    c = GasConstants()
    w = z + d
    u = from_invariants((z, w), c)
    if u.rho < 1e-10:
        return
    z2, w2 = to_invariants(u, c)
    assert z2 == pytest.approx(z, rel=1e-12, abs=1e-12 * max(1.0, abs(w)))
    assert w2 == pytest.approx(w, rel=1e-12, abs=1e-12 * max(1.0, abs(z)))


@given(rho=st.floats(1e-8, 50.0), v=st.floats(-20, 20), gamma=st.floats(1.01, 5 / 3))
def test_sign_structure(rho, v, gamma):
    c = GasConstants(gamma)
    z, w = to_invariants(GasState(rho, rho * v), c)
    assert w > z
    if v >= 0:
        assert abs(w) >= abs(z) and w >= 0
    else:
        assert abs(w) <= abs(z) and z <= 0
    l1, l2 = char_speeds(GasState(rho, rho * v), c)
    assert l1 < l2
