"""Wave construction inside one dual cell ``[j dx, (j+1) dx]`` over one time step.

A :class:`CellFan` is an ordered list of wedges bounded by rays
``x = xc + s (t - t_n)`` from the cell midpoint ``xc``.  Each wedge holds a
steady block (which receives the source update) or a piece of an exact
Riemann solution (which does not).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .gas import DomainError, GasConstants, GasState, shock_speed_S, to_invariants
from .jumps import (
    ConstructionError,
    SteadyBlock,
    make_block,
    rh_residual_zw,
    rho_of,
    solve_diamond,
    solve_midtime_jump,
)
from .params import SchemeParams
from .riemann import WaveFan, solve

CASE_TAGS = ("R-1", "R-2", "R-3", "R-4")
VACUUM_TAGS = ("A-1.1", "A-1.2i", "A-1.2ii", "A-2.1", "A-2.2i", "A-2.2ii", "A-3", "A-4")


@dataclass(frozen=True, slots=True)
class Patch:
    """Exact Riemann solution centred at the cell midpoint."""

    fan: WaveFan


@dataclass(frozen=True, slots=True)
class Wedge:
    lo: float
    hi: float
    piece: SteadyBlock | Patch


@dataclass(frozen=True, slots=True)
class Jump:
    sigma: float
    left: tuple[float, float]
    right: tuple[float, float]
    kind: str  # "ladder" (discretised rarefaction) | "shock" | "patch"
    residual: float


@dataclass
class CellFan:
    j: int
    xc: float
    wedges: list[Wedge]
    tags: tuple[str, ...]
    jumps: list[Jump] = field(default_factory=list)
    junctions: int = 0
    min_fan_rho: float = math.inf
    bounds: tuple[float, float] = (-math.inf, math.inf)

    @property
    def rays(self) -> list[float]:
        return [w.hi for w in self.wedges[:-1]]

    def piece_at(self, xi: float) -> SteadyBlock | Patch:
        for wd in self.wedges:
            if xi < wd.hi:
                return wd.piece
        return self.wedges[-1].piece

    def zw_bar(self, x: float, tau: float, profile) -> tuple[float, float]:
        """Invariants of the construction before the source update."""
        xi = (x - self.xc) / tau if tau > 0.0 else (-math.inf if x < self.xc else math.inf)
        piece = self.piece_at(xi)
        if isinstance(piece, Patch):
            u = piece.fan.sample(xi)
            return to_invariants(u, piece.fan.gas)
        return piece.zw(x, profile)

    def state(self, x: float, tau: float, profile, c: GasConstants) -> GasState:
        """Full approximate solution at ``x`` and elapsed time ``tau``."""
        xi = (x - self.xc) / tau if tau > 0.0 else (-math.inf if x < self.xc else math.inf)
        piece = self.piece_at(xi)
        if isinstance(piece, Patch):
            return piece.fan.sample(xi)
        z, w = piece.zw(x, profile)
        z, w, _ = fractional_step(z, w, x, tau, piece.mode, profile, c)
        rho = rho_of(z, w, c)
        return GasState(rho, rho * 0.5 * (w + z))


# ---------------------------------------------------------------------------
# source update


def fractional_step(z: float, w: float, x: float, tau: float, mode: str, profile,
                    c: GasConstants) -> tuple[float, float, bool]:
    """Explicit source correction of a steady block value; returns ``(z, w, clamped)``.

    ``flip_w`` and ``flip_z`` carry the sign used next to vacuum on the w and
    z update respectively.  A crossing ``w < z`` is clamped to vacuum.
    """
    if profile.zero_source or tau == 0.0:
        return z, w, False
    a = float(profile.a(x))
    b = profile.b1(x)
    rt = 0.5 * c.theta * (w - z)
    v = 0.5 * (w + z)
    g = a * v * rt
    l1 = v - rt
    l2 = v + rt
    if mode == "flip_z":
        zn = z - (g + b * l1 * z) * tau
    else:
        zn = z - (g - b * l1 * z) * tau
    if mode == "flip_w":
        wn = w + (g + b * l2 * w) * tau
    else:
        wn = w + (g - b * l2 * w) * tau
    if wn < zn:
        return 0.0, 0.0, True
    return zn, wn, False


MODE_CODES = {"regular": 0, "flip_w": 1, "flip_z": 2}


def fractional_step_array(z, w, x, tau: float, mode, profile, c: GasConstants):
    """Vectorised :func:`fractional_step`; ``mode`` holds :data:`MODE_CODES`."""
    if profile.zero_source or tau == 0.0:
        return z, w, np.zeros(np.shape(z), dtype=bool)
    a = profile.a(x)
    b = profile.b(x)
    rt = 0.5 * c.theta * (w - z)
    v = 0.5 * (w + z)
    g = a * v * rt
    l1 = v - rt
    l2 = v + rt
    zs = np.where(mode == 2, 1.0, -1.0)
    ws = np.where(mode == 1, 1.0, -1.0)
    zn = z - (g + zs * b * l1 * z) * tau
    wn = w + (g + ws * b * l2 * w) * tau
    bad = wn < zn
    zn = np.where(bad, 0.0, zn)
    wn = np.where(bad, 0.0, wn)
    return zn, wn, bad


# ---------------------------------------------------------------------------
# homogeneous ladders


def ladder_levels(lo: float, hi: float, step: float) -> list[float]:
    """``lo, lo + step, ..., hi`` with ``max(floor((hi - lo)/step) + 1, 2)`` entries."""
    if hi < lo:
        raise DomainError(f"ladder needs lo <= hi (lo={lo}, hi={hi})")
    q = (hi - lo) / step
    k = math.floor(q)
    # a quotient a few ulps short of an integer counts as that integer
    if q - k > 1.0 - 1e-9:
        k += 1
    p = max(k + 1, 2)
    return [lo + i * step for i in range(p - 1)] + [hi]


def _v(z, w):
    return 0.5 * (w + z)


def _lam1(z, w, c):
    return 0.5 * (w + z) - 0.5 * c.theta * (w - z)


def _lam2(z, w, c):
    return 0.5 * (w + z) + 0.5 * c.theta * (w - z)


def ladder_speed_1(z0: float, z1: float, w: float, c: GasConstants) -> float:
    """Speed of the 1-rarefaction shock from ``(z0, w)`` to ``(z1, w)``."""
    return _v(z0, w) - shock_speed_S(rho_of(z1, w, c), rho_of(z0, w, c), c)


def ladder_speed_2(w0: float, w1: float, z: float, c: GasConstants) -> float:
    """Speed of the 2-rarefaction shock with right state ``(z, w0)`` and left ``(z, w1)``."""
    return _v(z, w0) + shock_speed_S(rho_of(z, w1, c), rho_of(z, w0, c), c)


def build_fan_ladder(uL: GasState, z_M: float, params: SchemeParams):
    """Homogeneous piecewise constant 1-fan: ``(p, levels, ray speeds)``."""
    c = params.c
    zL, wL = to_invariants(uL, c)
    if z_M < zL:
        raise DomainError(f"z_M={z_M} < z_L={zL}: not a 1-rarefaction")
    levels = ladder_levels(zL, z_M, params.fan_step)
    speeds = [ladder_speed_1(levels[i], levels[i + 1], wL, c) for i in range(len(levels) - 1)]
    return len(levels), levels, speeds


# ---------------------------------------------------------------------------
# construction context


@dataclass(frozen=True)
class CellContext:
    j: int
    params: SchemeParams
    profile: object
    dt: float

    @property
    def xl(self) -> float:
        return self.j * self.params.dx

    @property
    def xr(self) -> float:
        return (self.j + 1) * self.params.dx

    @property
    def xc(self) -> float:
        return (self.j + 0.5) * self.params.dx

    @property
    def lower(self) -> float:
        """Lower z bound of the cell's invariant region."""
        return -self.params.M * math.exp(-self.profile.B1(self.xr))

    @property
    def upper(self) -> float:
        """Upper w bound of the cell's invariant region."""
        return self.params.M * math.exp(self.profile.B1(self.xl))


def scheme_case(fan: WaveFan) -> int:
    """1: R1+S2, 2: S1+R2, 3: R1+R2, 4: S1+S2 (zero-strength waves count as rarefactions)."""
    r1 = fan.middle.rho <= fan.left.rho
    r2 = fan.middle.rho <= fan.right.rho
    return {(True, False): 1, (False, True): 2, (True, True): 3, (False, False): 4}[(r1, r2)]


def _ladder(first: SteadyBlock, family: int, levels: list[float], start: float, ctx: CellContext,
            out: CellFan):
    """Mid-time jumps through ``levels``; returns blocks and their separating rays.

    Family 1 runs left to right with ``levels`` in z; family 2 runs right to
    left with ``levels`` in w.  Rays come back ordered along the run.
    """
    P = ctx.params
    c = P.c
    prof = ctx.profile
    h = 0.5 * ctx.dt
    blocks = [first]
    rays: list[float] = []
    free = start
    prev = levels[0]
    floor = 0.5 * P.vacuum_level
    for target in levels[1:]:
        if family == 1:
            guess = ladder_speed_1(prev, target, free, c)
        else:
            guess = ladder_speed_2(prev, target, free, c)
        sigma, free = solve_midtime_jump(blocks[-1], family, target, (guess, free), ctx.xc, ctx.dt,
                                         prof, c, P.newton_tol, P.newton_max_iter)
        if rays and not ((sigma > rays[-1]) if family == 1 else (sigma < rays[-1])):
            raise ConstructionError(f"{family}-fan rays out of order ({rays[-1]} then {sigma})")
        zw = (target, free) if family == 1 else (free, target)
        rho = rho_of(zw[0], zw[1], c)
        out.min_fan_rho = min(out.min_fan_rho, rho)
        if not rho > floor:
            raise ConstructionError(f"fan state density {rho} below floor {floor}")
        x = ctx.xc + sigma * h
        near = blocks[-1].zw(x, prof)
        if family == 1:
            res = rh_residual_zw(sigma, near, zw, c)
            out.jumps.append(Jump(sigma, near, zw, "ladder", res))
        else:
            res = rh_residual_zw(sigma, zw, near, c)
            out.jumps.append(Jump(sigma, zw, near, "ladder", res))
        blocks.append(make_block(x, zw[0], zw[1], prof))
        rays.append(sigma)
        prev = target
    return blocks, rays, free


def construct_cell_regular(zwL, zwR, fan: WaveFan, case: int, ctx: CellContext) -> CellFan:
    """Fans of steady blocks joined by a middle steady block (middle state away from vacuum)."""
    P = ctx.params
    c = P.c
    prof = ctx.profile
    zL, wL = zwL
    zR, wR = zwR
    zM, wM = to_invariants(fan.middle, c)
    out = CellFan(ctx.j, ctx.xc, [], (CASE_TAGS[case - 1],))
    rare1 = case in (1, 3)
    rare2 = case in (2, 3)

    left = make_block(ctx.xl, zL, wL, prof)
    if rare1:
        levels = ladder_levels(zL, max(zM, zL), P.fan_step)
        blocksL, raysL, wcur = _ladder(left, 1, levels[:-1], wL, ctx, out)
        sp_guess = ladder_speed_1(levels[-2], levels[-1], wcur, c)
    else:
        blocksL, raysL = [left], []
        sp_guess = fan.wave1.lo

    right = make_block(ctx.xr, zR, wR, prof)
    if rare2:
        neg = ladder_levels(-wR, -min(wM, wR), P.fan_step)
        levels = [-v for v in neg]
        blocksR, raysR, zcur = _ladder(right, 2, levels[:-1], zR, ctx, out)
        ss_guess = ladder_speed_2(levels[-2], levels[-1], zcur, c)
    else:
        blocksR, raysR = [right], []
        ss_guess = fan.wave2.lo

    sp, ss, zm, wm = solve_diamond(blocksL[-1], blocksR[-1], (sp_guess, ss_guess, zM, wM), ctx.xc,
                                   ctx.dt, prof, c, P.newton_tol, P.newton_max_iter)
    lo_ok = not raysL or raysL[-1] < sp
    hi_ok = not raysR or ss < raysR[-1]
    if not (lo_ok and sp < ss and hi_ok):
        raise ConstructionError(f"diamond rays out of order (sigma_p={sp}, sigma_s={ss})")
    mid = make_block(ctx.xc, zm, wm, prof)
    out.min_fan_rho = min(out.min_fan_rho, rho_of(zm, wm, c))
    h = 0.5 * ctx.dt
    xp = ctx.xc + sp * h
    xs = ctx.xc + ss * h
    lp, mp = blocksL[-1].zw(xp, prof), mid.zw(xp, prof)
    ms, rs_ = mid.zw(xs, prof), blocksR[-1].zw(xs, prof)
    out.jumps.append(Jump(sp, lp, mp, "ladder" if rare1 else "shock", rh_residual_zw(sp, lp, mp, c)))
    out.jumps.append(Jump(ss, ms, rs_, "ladder" if rare2 else "shock", rh_residual_zw(ss, ms, rs_, c)))

    edges = [-math.inf] + raysL + [sp]
    for blk, lo, hi in zip(blocksL, edges[:-1], edges[1:]):
        out.wedges.append(Wedge(lo, hi, blk))
    out.wedges.append(Wedge(sp, ss, mid))
    edges = [math.inf] + raysR + [ss]
    right_wedges = [Wedge(lo, hi, blk) for blk, hi, lo in zip(blocksR, edges[:-1], edges[1:])]
    out.wedges.extend(reversed(right_wedges))
    return out


# ---------------------------------------------------------------------------
# near-vacuum construction


def _near_vacuum_side(zw, side: str, ctx: CellContext, out: CellFan):
    """One side of a near-vacuum cell.

    Returns ``(wedges, star state, star ray, tag)``; wedges run from the cell
    edge inwards (left side: increasing rays, right side: decreasing).
    """
    P = ctx.params
    c = P.c
    prof = ctx.profile
    th = c.theta
    z, w = zw
    rho = rho_of(z, w, c)
    two = 2.0 * P.vacuum_level
    if side == "L":
        if rho > two:
            z1 = w - 2.0 * two**th / th
            levels = ladder_levels(z, z1, P.fan_step)
            first = make_block(ctx.xl, z, w, prof)
            blocks, rays, w2 = _ladder(first, 1, levels, w, ctx, out)
            lam = _lam1(z1, w2, c)
            if lam <= rays[-1]:
                lam = rays[-1]
            edges = [-math.inf] + rays + [lam]
            wedges = [Wedge(lo, hi, b) for b, lo, hi in zip(blocks, edges[:-1], edges[1:])]
            return wedges, (max(z1, ctx.lower), w), lam, "A-1.1"
        if z >= ctx.lower:
            return [], (z, w), -math.inf, "A-1.2i"
        L = ctx.lower
        B_l = prof.B1(ctx.xl)
        target = B_l + math.log(z / L)
        x4 = _invert_B(prof, target, ctx.xl, ctx.xr)
        z4, w4 = L, w * (L / z)
        lam = _lam1(z4, w4, c)
        blk = make_block(ctx.xl, z, w, prof, mode="flip_w")
        return [Wedge(-math.inf, lam, blk)], (z4, w4), lam, "A-1.2ii"
    if rho > two:
        w1 = z + 2.0 * two**th / th
        neg = ladder_levels(-w, -w1, P.fan_step)
        levels = [-v for v in neg]
        first = make_block(ctx.xr, z, w, prof)
        blocks, rays, z2 = _ladder(first, 2, levels, z, ctx, out)
        lam = _lam2(z2, w1, c)
        if lam >= rays[-1]:
            lam = rays[-1]
        edges = [math.inf] + rays + [lam]
        wedges = [Wedge(lo, hi, b) for b, hi, lo in zip(blocks, edges[:-1], edges[1:])]
        return wedges, (z, min(w1, ctx.upper)), lam, "A-2.1"
    if w <= ctx.upper:
        return [], (z, w), math.inf, "A-2.2i"
    U = ctx.upper
    B_r = prof.B1(ctx.xr)
    target = B_r + math.log(U / w)
    _invert_B(prof, target, ctx.xl, ctx.xr)
    z4, w4 = z * (U / w), U
    lam = _lam2(z4, w4, c)
    blk = make_block(ctx.xr, z, w, prof, mode="flip_z")
    return [Wedge(lam, math.inf, blk)], (z4, w4), lam, "A-2.2ii"


def _invert_B(profile, target: float, xa: float, xb: float) -> float:
    """``x`` in ``[xa, xb]`` with ``B(x) = target``; ``B`` is nondecreasing."""
    fa = profile.B1(xa) - target
    fb = profile.B1(xb) - target
    tol = 1e-14 * max(1.0, abs(target))
    if fa > tol or fb < -tol:
        raise ConstructionError(f"no point with B(x)={target} in [{xa}, {xb}]")
    if fa >= 0.0:
        return xa
    if fb <= 0.0:
        return xb
    return brentq(lambda x: profile.B1(x) - target, xa, xb, xtol=1e-15, rtol=1e-15)


def _state(zw, c):
    rho = rho_of(zw[0], zw[1], c)
    return GasState(rho, rho * 0.5 * (zw[0] + zw[1])) if rho > 0.0 else GasState(0.0, 0.0)


def _patch_jumps(fan: WaveFan, lo: float, hi: float, out: CellFan, c: GasConstants):
    for wave, a, b in ((fan.wave1, fan.left, fan.middle), (fan.wave2, fan.middle, fan.right)):
        if wave.kind == "shock" and lo < wave.lo < hi:
            za, zb = to_invariants(a, c), to_invariants(b, c)
            out.jumps.append(Jump(wave.lo, za, zb, "patch", rh_residual_zw(wave.lo, za, zb, c)))


def construct_cell_vacuum(zwL, zwR, fan: WaveFan, case: int, ctx: CellContext) -> CellFan:
    """Near-vacuum construction: exact Riemann patches plus fans or damped blocks at the edges."""
    c = ctx.params.c
    out = CellFan(ctx.j, ctx.xc, [], (), bounds=(ctx.lower, ctx.upper))
    tags = []
    left_w, right_w = [], []
    uL_star, uR_star = zwL, zwR
    lamL, lamR = -math.inf, math.inf
    if case in (1, 3):
        left_w, uL_star, lamL, tag = _near_vacuum_side(zwL, "L", ctx, out)
        tags.append(tag)
    if case in (2, 3):
        right_w, uR_star, lamR, tag = _near_vacuum_side(zwR, "R", ctx, out)
        tags.append(tag)
    if case == 3:
        tags.append("A-3")
    elif case == 4:
        tags.append("A-4")
    if lamL >= lamR:
        raise ConstructionError(f"near-vacuum rays cross ({lamL} >= {lamR})")
    if uL_star == zwL and uR_star == zwR:
        pfan = fan
    else:
        pfan = solve(_state(uL_star, c), _state(uR_star, c), c)
    out.wedges.extend(left_w)
    out.wedges.append(Wedge(lamL, lamR, Patch(pfan)))
    out.wedges.extend(reversed(right_w))
    out.junctions = int(bool(left_w)) + int(bool(right_w))
    _patch_jumps(pfan, lamL, lamR, out, c)
    out.tags = tuple(tags)
    return out


def construct_cell(zwL, zwR, ctx: CellContext) -> CellFan:
    """Dispatch on the Riemann pattern and the middle density."""
    c = ctx.params.c
    uL, uR = _state(zwL, c), _state(zwR, c)
    fan = solve(uL, uR, c)
    case = scheme_case(fan)
    try:
        if fan.middle.rho > ctx.params.vacuum_level:
            cell = construct_cell_regular(zwL, zwR, fan, case, ctx)
        else:
            cell = construct_cell_vacuum(zwL, zwR, fan, case, ctx)
    except ConstructionError as exc:
        exc.cell = ctx.j
        raise
    cell.bounds = (ctx.lower, ctx.upper)
    return cell
