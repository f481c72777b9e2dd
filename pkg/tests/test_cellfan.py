import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import brentq

from nozzleflow.cellfan import (
    CellContext,
    _invert_B,
    construct_cell,
    fractional_step,
    fractional_step_array,
    ladder_levels,
    MODE_CODES,
)
from nozzleflow.gas import GasConstants, GasState, to_invariants

GAS = GasConstants(5 / 3)
from nozzleflow.nozzle import ConstantWeight, NozzleProfile, mu_sigma, presets
from nozzleflow.params import SchemeParams
from nozzleflow.riemann import solve


def make_ctx(gas, profile, dx=0.01, M=4.0, j=0):
    P = SchemeParams.build(gas, M, dx, 1.0, profile)
    return CellContext(j, P, profile, P.dt)


def test_fractional_step_identity_without_source(gas):
    laval = presets("laval", gas=gas)
    assert fractional_step(-1.3, 2.7, 0.1, 0.0, "regular", laval, gas) == (-1.3, 2.7, False)
    flat = presets("constant")
    for mode in ("regular", "flip_w", "flip_z"):
        assert fractional_step(-1.3, 2.7, 0.1, 0.5, mode, flat, gas) == (-1.3, 2.7, False)


def test_fractional_step_array_matches_scalar(gas):
    prof = presets("laval", gas=gas)
    rng = np.random.default_rng(3)
    z = -rng.uniform(0, 2, 50)
    w = z + rng.uniform(0, 3, 50)
    x = rng.uniform(-1, 1, 50)
    modes = rng.integers(0, 3, 50)
    names = {v: k for k, v in MODE_CODES.items()}
    zn, wn, _ = fractional_step_array(z, w, x, 1e-3, modes, prof, gas)
    for i in range(50):
        zs, ws, _ = fractional_step(z[i], w[i], x[i], 1e-3, names[modes[i]], prof, gas)
        assert (zn[i], wn[i]) == pytest.approx((zs, ws), abs=1e-14)


@given(x=st.floats(-1, 1), zneg=st.floats(0, 5), frac=st.floats(0, 1), tau=st.floats(0, 1e-2))
def test_source_step_keeps_z_from_decreasing(x, zneg, frac, tau):
    prof = presets("laval", gas=GAS)
    sigma = mu_sigma(GAS).sigma
    z = -zneg
    w = z + frac * (-z / sigma - z)
    zn, _, _ = fractional_step(z, w, x, tau, "regular", prof, GAS)
    assert zn >= z - 1e-15 * (1 + abs(z))


@given(x=st.floats(-1, 1), w=st.floats(0, 5), frac=st.floats(0, 1), tau=st.floats(0, 1e-2))
def test_source_step_keeps_w_from_increasing(x, w, frac, tau):
    prof = presets("laval", gas=GAS)
    sigma = mu_sigma(GAS).sigma
    z = -w / sigma + frac * (w + w / sigma)
    _, wn, _ = fractional_step(z, w, x, tau, "regular", prof, GAS)
    assert wn <= w + 1e-15 * (1 + abs(w))


def test_ladder_levels():
    assert ladder_levels(0.0, 1.0, 0.25) == [0.0, 0.25, 0.5, 0.75, 1.0]
    lv = ladder_levels(0.0, 1.0, 0.3)
    assert len(lv) == 4 and lv[-1] == 1.0
    assert ladder_levels(0.0, 0.1, 0.3) == [0.0, 0.1]
    assert ladder_levels(0.0, 0.3 * 3, 0.3)[-1] == 0.3 * 3 and len(ladder_levels(0.0, 0.9, 0.3)) == 4


PAIRS = [
    ((1.0, 1.0), (1.0, -1.0)),  # two shocks
    ((1.0, -0.3), (1.0, 0.3)),  # two rarefactions
    ((2.0, 0.0), (1.0, 0.0)),  # rarefaction then shock
    ((1.0, 0.0), (2.0, 0.0)),  # shock then rarefaction
]


@pytest.mark.parametrize("left,right", PAIRS)
def test_homogeneous_cell_matches_riemann(gas, left, right):
    # outer states are exact; the middle state carries the ladder's O(step^2) defect
    flat = presets("constant")
    ctx = make_ctx(gas, flat)
    uL = GasState(left[0], left[0] * left[1])
    uR = GasState(right[0], right[0] * right[1])
    cell = construct_cell(to_invariants(uL, gas), to_invariants(uR, gas), ctx)
    assert cell.tags[0].startswith("R-")
    fan = solve(uL, uR, gas)
    tau = ctx.dt
    fans = [(wv.lo, wv.hi) for wv in (fan.wave1, fan.wave2)]
    for xi in np.linspace(-4, 4, 161):
        if any(lo - 0.05 <= xi <= hi + 0.05 for lo, hi in fans):
            continue
        u = cell.state(ctx.xc + xi * tau, tau, flat, gas)
        ex = fan.sample(float(xi))
        outer = xi < fans[0][0] or xi > fans[1][1]
        tol = 1e-11 if outer or fan.wave1.kind == fan.wave2.kind == "shock" else ctx.params.fan_step**2
        assert (u.rho, u.m) == pytest.approx((ex.rho, ex.m), abs=tol)


@given(rl=st.floats(0.3, 2), vl=st.floats(-1, 1), rr=st.floats(0.3, 2), vr=st.floats(-1, 1),
       j=st.integers(-90, 89))
def test_rays_strictly_increasing(rl, vl, rr, vr, j):
    prof = presets("laval", gas=GAS)
    ctx = make_ctx(GAS, prof, M=6.0, j=j)
    zwL = to_invariants(GasState(rl, rl * vl), GAS)
    zwR = to_invariants(GasState(rr, rr * vr), GAS)
    cell = construct_cell(zwL, zwR, ctx)
    rays = cell.rays
    assert all(a < b for a, b in zip(rays, rays[1:]))
    assert all(jp.residual <= 1e-11 for jp in cell.jumps)


def test_invert_B_against_brentq():
    b = 0.7
    prof = NozzleProfile("c", 1.0, weight=ConstantWeight(b, -1.0, 1.0))
    for target in (-0.2, 0.0, 0.13, 0.69):
        x = _invert_B(prof, target, -1.0, 1.0)
        assert x == pytest.approx(target / b, abs=1e-14)
        ref = brentq(lambda s: prof.B1(s) - target, -1.0, 1.0, xtol=1e-15)
        assert x == pytest.approx(ref, abs=1e-13)


def test_near_vacuum_left_damped_block(gas):
    # a thin left state with z below the cell's lower bound takes the damped-block path
    prof = NozzleProfile("c", 1.0, weight=ConstantWeight(0.5, -1.0, 1.0))
    ctx = make_ctx(gas, prof, dx=0.01, M=1.0, j=10)
    L = ctx.lower
    rho = 0.25 * ctx.params.vacuum_level
    s = rho**gas.theta / gas.theta
    zl = L * (1 + 1e-4)
    zwL = (zl, zl + 2 * s)
    cell = construct_cell(zwL, (0.0, 0.0), ctx)
    assert "A-1.2ii" in cell.tags
    # the damped block reaches z = L where B has grown by log(z/L)
    x4 = _invert_B(prof, prof.B1(ctx.xl) + math.log(zl / L), ctx.xl, ctx.xr)
    assert x4 == pytest.approx(ctx.xl + math.log(zl / L) / 0.5, abs=1e-14)
