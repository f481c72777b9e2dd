import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nozzleflow.gas import DomainError, GasConstants
from nozzleflow.nozzle import ConstantWeight, NozzleProfile, presets
from nozzleflow.params import SchemeParams, auto_M, default_delta, exponent_violations, mesh_ratio


def test_mesh_ratio_examples():
    flat = presets("constant")
    assert mesh_ratio(1.0, flat, 0.01) == (0.01, 0.005)
    ln2 = NozzleProfile("w", 1.0, weight=ConstantWeight(math.log(2.0), 0.0, 1.0))
    dx, dt = mesh_ratio(1.0, ln2, 0.01)
    assert dx / dt == pytest.approx(4.0, rel=1e-15)
    assert mesh_ratio(2.0, flat, 0.01)[1] == 0.5 * mesh_ratio(1.0, flat, 0.01)[1]
    with pytest.raises(DomainError):
        mesh_ratio(0.0, flat, 0.01)


def test_auto_M_examples(gas):
    flat = presets("constant")
    x = np.linspace(-1, 1, 11)
    assert auto_M(x, np.ones_like(x), np.zeros_like(x), flat, gas) == pytest.approx(3.0, rel=1e-11)
    assert auto_M(x, np.zeros_like(x), np.zeros_like(x), flat, gas) == 0.0
    m1 = auto_M(x, np.ones_like(x), np.full_like(x, 0.5), flat, gas)
    m2 = auto_M(x, np.ones_like(x), np.full_like(x, 1.0), flat, gas)
    assert m2 > m1
    with pytest.raises(DomainError):
        auto_M(x, np.full_like(x, np.nan), np.zeros_like(x), flat, gas)
    with pytest.raises(DomainError):
        auto_M(x, -np.ones_like(x), np.zeros_like(x), flat, gas)


def test_defaults_admissible_for_all_gamma():
    for g in np.linspace(1.0001, 5 / 3, 60):
        c = GasConstants(float(g))
        assert exponent_violations(0.7, 0.1, default_delta(c), c) == []


def test_alpha_too_large_rejected(gas):
    msgs = exponent_violations(0.95, 0.1, default_delta(gas), gas)
    assert any("1 - 2 beta" in m for m in msgs)
    with pytest.raises(DomainError):
        SchemeParams(gas, 1.0, 0.01, 1.0, alpha=0.95)


def test_params_derived_levels(gas):
    P = SchemeParams.build(gas, 3.0, 0.01, 0.1, presets("constant"))
    assert P.dt == pytest.approx(0.01 / 6.0)
    assert P.fan_step == 0.01**0.7 and P.vacuum_level == 0.01**0.1
    assert P.cutoff_level == 0.01**P.delta and P.delta == pytest.approx(1.25)
    with pytest.raises(DomainError):
        SchemeParams(gas, 1.0, 0.01, 1.0, gauss_points=8)
    with pytest.raises(DomainError):
        SchemeParams(gas, 1.0, 0.01, -1.0)


@given(M=st.floats(1e-3, 1e3), dx=st.floats(1e-4, 1.0))
def test_ratio_property(M, dx):
    prof = presets("laval")
    _, dt = mesh_ratio(M, prof, dx)
    assert dx / dt == pytest.approx(2 * M * math.exp(prof.max_one_sided), rel=1e-12)
