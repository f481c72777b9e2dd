"""Exact Riemann solver for the homogeneous isentropic Euler equations.

The middle state is found in the ``(rho, v)`` plane as the intersection of the
forward 1-wave curve through the left state and the backward 2-wave curve
through the right state.  Vacuum is handled explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gas import (
    RHO_VACUUM,
    VACUUM,
    GasConstants,
    GasState,
    char_speeds,
    pressure,
    rho_theta,
    shock_speed_S,
    state_from_rho_v,
    to_invariants,
    wave_curve,
)

MAX_ITER = 200
# jumps this small in both rho and v are treated as no wave at all
DEGENERATE_JUMP = 1e-12


class RiemannSolverError(RuntimeError):
    def __init__(self, msg, bracket=None):
        super().__init__(msg)
        self.bracket = bracket


@dataclass(frozen=True)
class Wave:
    """One elementary wave.  Shocks have ``lo == hi``."""

    family: int
    kind: str  # "shock" | "rarefaction" | "none"
    lo: float
    hi: float


@dataclass(frozen=True)
class WaveFan:
    left: GasState
    middle: GasState
    right: GasState
    wave1: Wave
    wave2: Wave
    gas: GasConstants
    region: str

    @property
    def vacuum(self) -> bool:
        return self.middle.rho <= 0.0

    def speeds(self) -> tuple[float, float, float, float]:
        return self.wave1.lo, self.wave1.hi, self.wave2.lo, self.wave2.hi

    def segments(self):
        """Pieces ``(xi_lo, xi_hi, kind, data)`` covering the real line."""
        w1, w2 = self.wave1, self.wave2
        segs = [(-math.inf, w1.lo, "const", self.left)]
        if w1.kind == "rarefaction" and w1.hi > w1.lo:
            zL, wL = to_invariants(self.left, self.gas)
            segs.append((w1.lo, w1.hi, "fan1", wL))
        segs.append((w1.hi, w2.lo, "const", self.middle))
        if w2.kind == "rarefaction" and w2.hi > w2.lo:
            zR, wR = to_invariants(self.right, self.gas)
            segs.append((w2.lo, w2.hi, "fan2", zR))
        segs.append((w2.hi, math.inf, "const", self.right))
        return segs

    def sample(self, xi: float) -> GasState:
        return sample(self, xi)

    def invariants_at(self, xis) -> tuple[list[float], list[float]]:
        """Riemann invariants ``(z, w)`` at each ``xi``; vacuum reads as ``(0, 0)``."""
        c = self.gas
        zl, wl = to_invariants(self.left, c)
        zm, wm = to_invariants(self.middle, c)
        zr, wr = to_invariants(self.right, c)
        w1, w2 = self.wave1, self.wave2
        fan1 = w1.kind == "rarefaction" and w1.hi > w1.lo
        fan2 = w2.kind == "rarefaction" and w2.hi > w2.lo
        k = 2.0 / (1.0 + c.theta)
        zs, ws = [], []
        for xi in xis:
            if xi < w1.lo:
                z, w = zl, wl
            elif fan1 and xi < w1.hi:
                z, w = (wl - k * (wl - xi), wl) if xi < wl else (0.0, 0.0)
            elif xi < w2.lo:
                z, w = zm, wm
            elif fan2 and xi < w2.hi:
                z, w = (zr, zr + k * (xi - zr)) if xi > zr else (0.0, 0.0)
            else:
                z, w = zr, wr
            zs.append(z)
            ws.append(w)
        return zs, ws

    def integrate(self, xi_a: float, xi_b: float) -> tuple[float, float]:
        return integrate(self, xi_a, xi_b)


def _fan1_state(w: float, xi: float, c: GasConstants) -> GasState:
    th = c.theta
    s = w - xi
    if s <= 0.0:
        return VACUUM
    rho = (th * s / (1.0 + th)) ** (1.0 / th)
    return state_from_rho_v(rho, (th * w + xi) / (1.0 + th))


def _fan2_state(z: float, xi: float, c: GasConstants) -> GasState:
    th = c.theta
    s = xi - z
    if s <= 0.0:
        return VACUUM
    rho = (th * s / (1.0 + th)) ** (1.0 / th)
    return state_from_rho_v(rho, (th * z + xi) / (1.0 + th))


def sample(fan: WaveFan, xi: float) -> GasState:
    """Self-similar solution at ``xi = (x - x0)/t``."""
    for lo, hi, kind, data in fan.segments():
        if xi < hi or hi == math.inf:
            if kind == "const":
                return data
            if kind == "fan1":
                return _fan1_state(data, xi, fan.gas)
            return _fan2_state(data, xi, fan.gas)
    return fan.right


def _fan_primitive(s: float, c: GasConstants) -> tuple[float, float]:
    """Antiderivatives in ``s`` of ``(k s)^(1/th)`` and ``s (k s)^(1/th)``."""
    th = c.theta
    if s <= 0.0:
        return 0.0, 0.0
    e = 1.0 / th
    k = th / (1.0 + th)
    base = (k * s) ** e
    return base * s / (e + 1.0), base * s * s / (e + 2.0)


def integrate(fan: WaveFan, xi_a: float, xi_b: float) -> tuple[float, float]:
    """Exact ``(int rho dxi, int m dxi)`` over ``[xi_a, xi_b]``."""
    if xi_b <= xi_a:
        return 0.0, 0.0
    c = fan.gas
    th = c.theta
    mass = mom = 0.0
    for lo, hi, kind, data in fan.segments():
        a = max(lo, xi_a)
        b = min(hi, xi_b)
        if b <= a:
            continue
        if kind == "const":
            mass += data.rho * (b - a)
            mom += data.m * (b - a)
        elif kind == "fan1":
            # rho = (k s)^(1/th), v = w - s/(1+th), s = w - xi
            w = data
            r_a, q_a = _fan_primitive(w - a, c)
            r_b, q_b = _fan_primitive(w - b, c)
            i_rho = r_a - r_b
            mass += i_rho
            mom += w * i_rho - (q_a - q_b) / (1.0 + th)
        else:
            # rho = (k s)^(1/th), v = z + s/(1+th), s = xi - z
            z = data
            r_a, q_a = _fan_primitive(a - z, c)
            r_b, q_b = _fan_primitive(b - z, c)
            i_rho = r_b - r_a
            mass += i_rho
            mom += z * i_rho + (q_b - q_a) / (1.0 + th)
    return mass, mom


# ---------------------------------------------------------------------------
# wave curves in the (rho, v) plane with derivatives, for the root solve


def _hugoniot(rho, rho0, c):
    """``H(rho) = sqrt((p - p0)(rho - rho0)/(rho rho0))`` and ``dH/drho``."""
    g = c.gamma
    p = pressure(rho, c)
    dp = p - pressure(rho0, c)
    dr = rho - rho0
    G = dp * dr / (rho * rho0)
    if G <= 0.0:
        return 0.0, math.sqrt(rho0 ** (g - 1.0)) / rho0
    dG = (rho ** (g - 1.0) * dr + dp) / (rho * rho0) - G / rho
    H = math.sqrt(G)
    return H, 0.5 * dG / H


def _curve1(rho, uL, zwL, c):
    """Velocity and slope on the forward 1-wave curve through ``uL``."""
    if rho <= uL.rho:
        rt = rho_theta(rho, c)
        return zwL[1] - rt / c.theta, -(rt / rho if rho > 0.0 else math.inf)
    H, dH = _hugoniot(rho, uL.rho, c)
    return uL.v - H, -dH


def _curve2(rho, uR, zwR, c):
    """Velocity and slope on the backward 2-wave curve through ``uR``."""
    if rho <= uR.rho:
        rt = rho_theta(rho, c)
        return zwR[0] + rt / c.theta, (rt / rho if rho > 0.0 else math.inf)
    H, dH = _hugoniot(rho, uR.rho, c)
    return uR.v + H, dH


def _middle_density(uL, uR, zwL, zwR, c):
    def phi(r):
        v1, d1 = _curve1(r, uL, zwL, c)
        v2, d2 = _curve2(r, uR, zwR, c)
        return v1 - v2, d1 - d2

    lo = 0.0
    dv = abs(uL.v - uR.v)
    hi = max(uL.rho, uR.rho) * (1.0 + dv) ** (1.0 / c.theta) + 1.0
    f_hi, _ = phi(hi)
    expand = 0
    while f_hi > 0.0:
        lo, hi = hi, 2.0 * hi
        f_hi, _ = phi(hi)
        expand += 1
        if expand > 200:
            raise RiemannSolverError("could not bracket middle density", (lo, hi))
    # start Newton from the two-rarefaction estimate, clipped to the bracket
    x = 0.5 * c.theta * (zwL[1] - zwR[0])
    x = x ** (1.0 / c.theta) if x > 0.0 else 0.5 * hi
    if not lo < x < hi:
        x = 0.5 * (lo + hi)
    for _ in range(MAX_ITER):
        f, df = phi(x)
        if f == 0.0:
            return x
        if f > 0.0:
            lo = x
        else:
            hi = x
        step = f / df if df != 0.0 and math.isfinite(df) else 0.0
        x_new = x - step
        if not (lo < x_new < hi) or step == 0.0:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-16 * x + 1e-300 or hi - lo <= 4e-16 * hi:
            return x_new
        x = x_new
    raise RiemannSolverError("middle density did not converge", (lo, hi))


def _region(shock1: bool, shock2: bool) -> str:
    return {(False, False): "I", (True, False): "II", (True, True): "III", (False, True): "IV"}[
        (shock1, shock2)
    ]


def solve(uL: GasState, uR: GasState, c: GasConstants) -> WaveFan:
    """Exact self-similar solution of the Riemann problem ``(uL, uR)``."""
    if uL.rho < 0.0 or uR.rho < 0.0:
        raise ValueError("negative density in Riemann data")
    vacL = uL.rho < RHO_VACUUM
    vacR = uR.rho < RHO_VACUUM
    if vacL and vacR:
        none1 = Wave(1, "none", 0.0, 0.0)
        none2 = Wave(2, "none", 0.0, 0.0)
        return WaveFan(VACUUM, VACUUM, VACUUM, none1, none2, c, "vacuum")
    if vacL:
        zR, wR = to_invariants(uR, c)
        lam2 = char_speeds(uR, c)[1]
        return WaveFan(
            VACUUM, VACUUM, uR, Wave(1, "none", zR, zR), Wave(2, "rarefaction", zR, lam2), c, "vacuum"
        )
    if vacR:
        zL, wL = to_invariants(uL, c)
        lam1 = char_speeds(uL, c)[0]
        return WaveFan(
            uL, VACUUM, VACUUM, Wave(1, "rarefaction", lam1, wL), Wave(2, "none", wL, wL), c, "vacuum"
        )

    zwL = to_invariants(uL, c)
    zwR = to_invariants(uR, c)
    lamL = char_speeds(uL, c)
    lamR = char_speeds(uR, c)
    if abs(uL.rho - uR.rho) < DEGENERATE_JUMP and abs(uL.v - uR.v) < DEGENERATE_JUMP:
        return WaveFan(
            uL,
            uL,
            uR,
            Wave(1, "rarefaction", lamL[0], lamL[0]),
            Wave(2, "rarefaction", lamR[1], lamR[1]),
            c,
            "I",
        )

    if zwL[1] <= zwR[0]:
        # the two rarefactions separate: vacuum between w_L and z_R
        return WaveFan(
            uL,
            VACUUM,
            uR,
            Wave(1, "rarefaction", lamL[0], zwL[1]),
            Wave(2, "rarefaction", zwR[0], lamR[1]),
            c,
            "vacuum",
        )

    rhoM = _middle_density(uL, uR, zwL, zwR, c)
    if rhoM < RHO_VACUUM:
        return WaveFan(
            uL,
            VACUUM,
            uR,
            Wave(1, "rarefaction", lamL[0], zwL[1]),
            Wave(2, "rarefaction", zwR[0], lamR[1]),
            c,
            "vacuum",
        )
    shock1 = rhoM > uL.rho
    shock2 = rhoM > uR.rho
    # velocity from the side that is a rarefaction keeps that invariant exact
    if not shock1:
        vM = _curve1(rhoM, uL, zwL, c)[0]
    elif not shock2:
        vM = _curve2(rhoM, uR, zwR, c)[0]
    else:
        vM = 0.5 * (_curve1(rhoM, uL, zwL, c)[0] + _curve2(rhoM, uR, zwR, c)[0])
    uM = GasState(rhoM, rhoM * vM)
    lamM = char_speeds(uM, c)
    if shock1:
        s = uL.v - shock_speed_S(rhoM, uL.rho, c)
        wave1 = Wave(1, "shock", s, s)
    else:
        wave1 = Wave(1, "rarefaction", lamL[0], lamM[0])
    if shock2:
        s = uR.v + shock_speed_S(rhoM, uR.rho, c)
        wave2 = Wave(2, "shock", s, s)
    else:
        wave2 = Wave(2, "rarefaction", lamM[1], lamR[1])
    return WaveFan(uL, uM, uR, wave1, wave2, c, _region(shock1, shock2))


def classify(uL: GasState, uR: GasState, c: GasConstants) -> str:
    """Wave pattern of the Riemann solution: ``I``-``IV`` or ``vacuum``."""
    return solve(uL, uR, c).region


# ---------------------------------------------------------------------------
# independent oracle: dense sampling plus bisection, shares no code with solve()


def _oracle_v1(rho, uL, c):
    rho = np.asarray(rho, dtype=float)
    th, g = c.theta, c.gamma
    pL = uL.rho**g / g
    rare = uL.v + (uL.rho**th - rho**th) / th
    with np.errstate(invalid="ignore", divide="ignore"):
        shock = uL.v - np.sqrt((rho**g / g - pL) * (rho - uL.rho) / (rho * uL.rho))
    return np.where(rho <= uL.rho, rare, shock)


def _oracle_v2(rho, uR, c):
    rho = np.asarray(rho, dtype=float)
    th, g = c.theta, c.gamma
    pR = uR.rho**g / g
    rare = uR.v - (uR.rho**th - rho**th) / th
    with np.errstate(invalid="ignore", divide="ignore"):
        shock = uR.v + np.sqrt((rho**g / g - pR) * (rho - uR.rho) / (rho * uR.rho))
    return np.where(rho <= uR.rho, rare, shock)


def oracle_middle_state(uL: GasState, uR: GasState, c: GasConstants, n_samples: int = 2000) -> GasState:
    """Middle state by brute force; returns ``VACUUM`` if the curves never meet."""
    if uL.rho <= 0.0 or uR.rho <= 0.0:
        return VACUUM
    if uL == uR:
        return uL

    def gap(r):
        return float(_oracle_v1(r, uL, c) - _oracle_v2(r, uR, c))

    r_max = 10.0 * max(uL.rho, uR.rho) + 10.0
    while gap(r_max) > 0.0:
        r_max *= 4.0
    grid = np.geomspace(1e-12, r_max, n_samples)
    vals = _oracle_v1(grid, uL, c) - _oracle_v2(grid, uR, c)
    if vals[0] <= 0.0:
        return VACUUM
    k = int(np.argmax(vals <= 0.0))
    lo, hi = grid[k - 1], grid[k]
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    rho = float(0.5 * (lo + hi))
    return GasState(rho, rho * float(_oracle_v1(rho, uL, c)))


def middle_on_curves(uL: GasState, uR: GasState, rhoM: float, c: GasConstants) -> GasState:
    """Left-curve state at ``rhoM``, via the public wave-curve API (for checks)."""
    if rhoM > uL.rho:
        return wave_curve(1, "shock", uL, rhoM, c)
    return wave_curve(1, "rarefaction", uL, rhoM, c)
