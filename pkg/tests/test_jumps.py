import math

import pytest

from nozzleflow.cellfan import ladder_speed_1, ladder_speed_2
from nozzleflow.gas import GasConstants, GasState, rh_residual, shock_speed_S, to_invariants
from nozzleflow.jumps import (
    ConstructionError,
    make_block,
    rh_residual_zw,
    rho_of,
    solve_diamond,
    solve_midtime_jump,
    steady_block,
)
from nozzleflow.nozzle import ConstantWeight, NozzleProfile, presets
from nozzleflow.params import mesh_ratio
from nozzleflow.riemann import solve


def zw_state(z, w, c):
    r = rho_of(z, w, c)
    return GasState(r, r * 0.5 * (z + w))


def test_steady_block_flat_is_identity(gas):
    flat = presets("constant")
    u = steady_block(0.7, 0.1, (-2.0, 3.0), flat, gas)
    assert to_invariants(u, gas) == pytest.approx((-2.0, 3.0), rel=1e-14)


def test_steady_block_constant_weight(gas):
    prof = NozzleProfile("c", 1.0, weight=ConstantWeight(0.2, -1.0, 1.0))
    z, w = make_block(0.1, -2.0, 3.0, prof).zw(0.6, prof)
    assert z == pytest.approx(-2.0 * math.exp(-0.1), rel=1e-15)
    assert w == pytest.approx(3.0 * math.exp(0.1), rel=1e-15)
    u = steady_block(0.1, 0.1, (-2.0, 3.0), prof, gas)
    assert to_invariants(u, gas) == pytest.approx((-2.0, 3.0), rel=1e-14)


def test_steady_block_crossing_vacuum(gas):
    prof = NozzleProfile("c", 1.0, weight=ConstantWeight(0.5, -1.0, 1.0))
    # z > 0 and w > 0 with w barely above z: moving left shrinks w and grows z
    with pytest.raises(ConstructionError):
        steady_block(-1.0, 1.0, (1.0, 1.05), prof, gas)


def test_midtime_jump_homogeneous(gas):
    flat = presets("constant")
    z0, w0 = -3.0, 3.0
    blk = make_block(0.0, z0, w0, flat)
    z1 = z0 + 0.05
    guess = ladder_speed_1(z0, z1, w0, gas)
    sigma, w1 = solve_midtime_jump(blk, 1, z1, (guess, w0), 0.005, 0.003, flat, gas)
    uL, uR = zw_state(z0, w0, gas), zw_state(z1, w1, gas)
    assert sigma == pytest.approx(uL.v - shock_speed_S(uR.rho, uL.rho, gas), abs=1e-13)
    assert max(map(abs, rh_residual(sigma, uL, uR, gas))) <= 1e-12
    # inverse shock curve and rarefaction curve are tangent to second order
    assert abs(w1 - w0) < 1e-4 and sigma == pytest.approx(guess, abs=1e-4)


def test_midtime_jump_family2_homogeneous(gas):
    flat = presets("constant")
    blk = make_block(0.01, -1.0, 2.0, flat)
    w1 = 2.0 - 0.05
    guess = ladder_speed_2(2.0, w1, -1.0, gas)
    sigma, z1 = solve_midtime_jump(blk, 2, w1, (guess, -1.0), 0.005, 0.003, flat, gas)
    assert rh_residual_zw(sigma, (z1, w1), (-1.0, 2.0), gas) <= 1e-12


def test_midtime_jump_on_nozzle(gas):
    prof = presets("laval", gas=gas)
    xc, dx = 0.305, 0.01
    _, dt = mesh_ratio(4.0, prof, dx)
    blk = make_block(xc - 0.5 * dx, -3.0, 3.2, prof)
    z1 = blk.zw(xc, prof)[0] + 0.04
    sig = []
    for tau in (dt, dt * (1 + 1e-6)):
        s, w1 = solve_midtime_jump(blk, 1, z1, (0.0, 3.2), xc, tau, prof, gas)
        x = xc + 0.5 * tau * s
        near = blk.zw(x, prof)
        assert max(map(abs, rh_residual(s, zw_state(*near, gas), zw_state(z1, w1, gas), gas))) <= 1e-12
        sig.append(s)
    slope = (sig[1] - sig[0]) / (dt * 1e-6)
    assert math.isfinite(slope) and abs(slope) < 1e3


def test_diamond_homogeneous_reduction(gas):
    flat = presets("constant")
    uL, uR = GasState(1.0, 1.0), GasState(1.0, -1.0)
    fan = solve(uL, uR, gas)
    zwL, zwR = to_invariants(uL, gas), to_invariants(uR, gas)
    zM, wM = to_invariants(fan.middle, gas)
    sp, ss, zm, wm = solve_diamond(make_block(0.0, *zwL, flat), make_block(0.01, *zwR, flat),
                                   (fan.wave1.lo + 0.01, fan.wave2.lo - 0.01, zM + 0.01, wM), 0.005, 0.002,
                                   flat, gas)
    assert sp == pytest.approx(fan.wave1.lo, abs=1e-11)
    assert ss == pytest.approx(fan.wave2.lo, abs=1e-11)
    assert (zm, wm) == pytest.approx((zM, wM), abs=1e-11)


def _diamond(prof, gas, dx, uL, uR, xc):
    _, dt = mesh_ratio(4.0, prof, dx)
    fan = solve(uL, uR, gas)
    zwL, zwR = to_invariants(uL, gas), to_invariants(uR, gas)
    left = make_block(xc - 0.5 * dx, *zwL, prof)
    right = make_block(xc + 0.5 * dx, *zwR, prof)
    zM, wM = to_invariants(fan.middle, gas)
    out = solve_diamond(left, right, (fan.wave1.lo, fan.wave2.lo, zM, wM), xc, dt, prof, gas)
    sp, ss, zm, wm = out
    xp, xs = xc + 0.5 * dt * sp, xc + 0.5 * dt * ss
    mid = make_block(xc, zm, wm, prof)
    assert rh_residual_zw(sp, left.zw(xp, prof), mid.zw(xp, prof), gas) <= 1e-12
    assert rh_residual_zw(ss, mid.zw(xs, prof), right.zw(xs, prof), gas) <= 1e-12
    return math.hypot(zm - zM, wm - wM)


def test_diamond_on_nozzle_converges_to_homogeneous(gas):
    prof = presets("laval", gas=gas)
    uL, uR = GasState(1.2, 1.2 * 0.6), GasState(0.9, -0.9 * 0.4)
    d1 = _diamond(prof, gas, 0.02, uL, uR, 0.4)
    d2 = _diamond(prof, gas, 0.01, uL, uR, 0.4)
    d3 = _diamond(prof, gas, 0.005, uL, uR, 0.4)
    assert d2 / d1 < 1.0 and d3 / d2 < 1.0
