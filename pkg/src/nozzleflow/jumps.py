"""Steady blocks and the implicit jump solves of the in-cell construction.

Jumps are solved on the Hugoniot locus written in velocity form,

    family 1 (left state l, right state r):  v_r - v_l + D(rho_r, rho_l) = 0,
                                              sigma = v_l - S(rho_r, rho_l)
    family 2 (left state l, right state r):  v_l - v_r - D(rho_l, rho_r) = 0,
                                              sigma = v_r + S(rho_l, rho_r)

with ``D(r, r0) = (r - r0) sqrt(Q/(r r0))``, ``S(r, r0) = sqrt(r Q / r0)`` and
``Q`` the divided difference of the pressure.  Both are smooth through
``r == r0``, so weak and vanishing jumps stay well conditioned.  These are
equivalent to the conservative jump relations; callers check the latter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .gas import DomainError, GasConstants, GasState, flux, pressure

# |r - r0| below this fraction of r switches Q to its midpoint expansion
_Q_TAYLOR = 1e-7


class ConstructionError(RuntimeError):
    """An in-cell construction failed; carries whatever context is known."""

    def __init__(self, msg, *, cell=None, step=None, iterate=None):
        super().__init__(msg)
        self.cell = cell
        self.step = step
        self.iterate = iterate

    def __str__(self):
        where = []
        if self.step is not None:
            where.append(f"step {self.step}")
        if self.cell is not None:
            where.append(f"cell {self.cell}")
        base = super().__str__()
        return f"{base} ({', '.join(where)})" if where else base


# ---------------------------------------------------------------------------
# steady blocks


@dataclass(frozen=True, slots=True)
class SteadyBlock:
    """``z = z_d exp(sz (B(x) - B_d))``, ``w = w_d exp(sw (B(x) - B_d))``.

    ``mode`` selects the source update applied on top of it: ``regular``
    (``sz, sw = -1, +1``), ``flip_w`` (both damped, left of a near-vacuum
    cell) or ``flip_z`` (its mirror image).
    """

    x_d: float
    z_d: float
    w_d: float
    B_d: float
    sz: float = -1.0
    sw: float = 1.0
    mode: str = "regular"

    def zw(self, x: float, profile) -> tuple[float, float]:
        e = profile.B1(x) - self.B_d
        if e == 0.0:
            return self.z_d, self.w_d
        return self.z_d * math.exp(self.sz * e), self.w_d * math.exp(self.sw * e)


MODES = {"regular": (-1.0, 1.0), "flip_w": (-1.0, -1.0), "flip_z": (1.0, 1.0)}


def make_block(x_d: float, z_d: float, w_d: float, profile, mode: str = "regular") -> SteadyBlock:
    sz, sw = MODES[mode]
    return SteadyBlock(x_d, z_d, w_d, profile.B1(x_d), sz, sw, mode)


def steady_block(x: float, x_d: float, zw_d: tuple[float, float], profile, c: GasConstants):
    """State of the regular steady block with data ``zw_d`` at ``x_d``, as ``(rho, m)``."""
    z, w = make_block(x_d, zw_d[0], zw_d[1], profile).zw(x, profile)
    if w < z:
        raise ConstructionError(f"steady block crosses vacuum at x={x}")
    rho = rho_of(z, w, c)
    if rho < 0.0:
        raise DomainError("negative density")
    return GasState(rho, rho * 0.5 * (w + z))


def rho_of(z: float, w: float, c: GasConstants) -> float:
    d = w - z
    if d <= 0.0:
        return 0.0
    return (0.5 * c.theta * d) ** (1.0 / c.theta)


def _block_prim(blk: SteadyBlock, x: float, profile, c: GasConstants):
    """``rho, v`` of a block at ``x`` with their x-derivatives, plus ``z, w``."""
    z, w = blk.zw(x, profile)
    d = w - z
    if not d > 0.0:
        raise ConstructionError(f"block state at x={x} is at or past vacuum (w - z = {d})")
    th = c.theta
    rho = (0.5 * th * d) ** (1.0 / th)
    bx = profile.b1(x)
    dz = blk.sz * bx * z
    dw = blk.sw * bx * w
    k = rho / (th * d)
    return rho, 0.5 * (w + z), k * (dw - dz), 0.5 * (dw + dz), z, w, k


# ---------------------------------------------------------------------------
# Hugoniot locus in velocity form


def _Q(r: float, r0: float, g: float):
    """``(p(r) - p(r0))/(r - r0)`` and its partial derivatives."""
    d = r - r0
    if abs(d) <= _Q_TAYLOR * max(r, r0):
        m = 0.5 * (r + r0)
        q = m ** (g - 1.0)
        dq = 0.5 * (g - 1.0) * m ** (g - 2.0)
        return q, dq, dq
    # expm1/log1p keeps the divided difference accurate for close densities
    q = r0**g * math.expm1(g * math.log1p(d / r0)) / (g * d)
    return q, (r ** (g - 1.0) - q) / d, (q - r0 ** (g - 1.0)) / d


def locus_terms(r: float, r0: float, c: GasConstants):
    """``S, S_r, S_r0, D, D_r, D_r0`` for positive densities."""
    q, q_r, q_r0 = _Q(r, r0, c.gamma)
    S = math.sqrt(r * q / r0)
    S_r = (q + r * q_r) / (2.0 * S * r0)
    S_r0 = r * (q_r0 - q / r0) / (2.0 * S * r0)
    R = math.sqrt(q / (r * r0))
    rr = 2.0 * R * r * r0
    R_r = (q_r - q / r) / rr
    R_r0 = (q_r0 - q / r0) / rr
    d = r - r0
    return S, S_r, S_r0, d * R, R + d * R_r, -R + d * R_r0


def signed_hugoniot(r: float, r0: float, c: GasConstants) -> float:
    """``sign(r - r0) sqrt((p - p0)(r - r0)/(r r0))``."""
    if r == r0:
        return 0.0
    return (r - r0) * math.sqrt((pressure(r, c) - pressure(r0, c)) / ((r - r0) * r * r0))


# ---------------------------------------------------------------------------
# small dense solver


def _solve_linear(A: list[list[float]], b: list[float]) -> list[float]:
    """Gaussian elimination with partial pivoting; raises on a zero pivot."""
    n = len(b)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda i: abs(M[i][col]))
        if M[piv][col] == 0.0 or not math.isfinite(M[piv][col]):
            raise ZeroDivisionError("singular Jacobian")
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
        pc = M[col]
        inv = 1.0 / pc[col]
        for i in range(col + 1, n):
            f = M[i][col] * inv
            if f != 0.0:
                Mi = M[i]
                for k in range(col, n + 1):
                    Mi[k] -= f * pc[k]
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = M[i][n]
        for k in range(i + 1, n):
            s -= M[i][k] * x[k]
        x[i] = s / M[i][i]
    return x


def _newton(fun, x0: list[float], valid, tol: float, max_iter: int, what: str):
    """Damped Newton; ``valid(x)`` rejects iterates that leave the physical domain.

    Stops one step after the residual sup-norm first drops to ``tol`` (or as
    soon as a step no longer lowers it).
    """
    errors = (ConstructionError, ValueError, ZeroDivisionError, OverflowError)
    x = list(x0)
    try:
        g, J = fun(x)
    except errors as exc:
        raise ConstructionError(f"{what}: initial guess invalid ({exc})", iterate=x) from None
    res = max(abs(v) for v in g)
    for it in range(max_iter):
        converged = res <= tol
        try:
            step = _solve_linear(J, [-v for v in g])
        except ZeroDivisionError:
            if converged:
                return x, res, it
            raise ConstructionError(f"{what}: singular Jacobian", iterate=x) from None
        lam = 1.0
        while lam >= 1e-10:
            trial = [xi + lam * si for xi, si in zip(x, step)]
            if valid(trial):
                try:
                    g_t, J_t = fun(trial)
                    res_t = max(abs(v) for v in g_t)
                except errors:
                    res_t = math.inf
                if res_t < res or (converged and res_t <= res):
                    break
            if converged:
                return x, res, it
            lam *= 0.5
        else:
            raise ConstructionError(f"{what}: line search failed (residual {res:.3e})", iterate=x)
        x, g, J, res = trial, g_t, J_t, res_t
        if converged:
            return x, res, it + 1
    if res <= tol:
        return x, res, max_iter
    raise ConstructionError(f"{what}: no convergence (residual {res:.3e})", iterate=x)


# ---------------------------------------------------------------------------
# mid-time jumps


def solve_midtime_jump(block: SteadyBlock, family: int, target: float, guess: tuple[float, float],
                       xc: float, dt: float, profile, c: GasConstants, tol: float = 1e-12,
                       max_iter: int = 60) -> tuple[float, float]:
    """Jump off ``block`` to a constant state with one invariant fixed at ``target``.

    Family 1: the block is on the left, the new state ``(target, w)`` on the
    right; returns ``(sigma, w)``.  Family 2: the block is on the right, the new
    state ``(z, target)`` on the left; returns ``(sigma, z)``.  The jump sits at
    ``xc + sigma dt/2`` where the block is evaluated.
    """
    h = 0.5 * dt
    th = c.theta

    def fun(u):
        sigma, free = u
        x = xc + sigma * h
        rb, vb, rb_x, vb_x, _, _, _ = _block_prim(block, x, profile, c)
        if family == 1:
            z, w = target, free
        else:
            z, w = free, target
        d = w - z
        if not d > 0.0:
            raise ConstructionError("jump state at vacuum")
        ru = (0.5 * th * d) ** (1.0 / th)
        vu = 0.5 * (w + z)
        ku = ru / (th * d)
        S, S_r, S_r0, D, D_r, D_r0 = locus_terms(ru, rb, c)
        if family == 1:
            g1 = sigma - vb + S
            g2 = vu - vb + D
            J = [
                [1.0 - h * vb_x + S_r0 * h * rb_x, S_r * ku],
                [-h * vb_x + D_r0 * h * rb_x, 0.5 + D_r * ku],
            ]
        else:
            g1 = sigma - vb - S
            g2 = vu - vb - D
            J = [
                [1.0 - h * vb_x - S_r0 * h * rb_x, S_r * ku],
                [-h * vb_x - D_r0 * h * rb_x, 0.5 + D_r * ku],
            ]
        return [g1, g2], J

    def valid(u):
        return (u[1] - target > 0.0) if family == 1 else (target - u[1] > 0.0)

    x, _, _ = _newton(fun, list(guess), valid, tol, max_iter, f"{family}-jump")
    return x[0], x[1]


def solve_diamond(left: SteadyBlock, right: SteadyBlock, guess: tuple[float, float, float, float],
                  xc: float, dt: float, profile, c: GasConstants, tol: float = 1e-12,
                  max_iter: int = 60) -> tuple[float, float, float, float]:
    """Middle block anchored at ``xc`` between a 1-jump and a 2-jump.

    Unknowns ``(sigma_p, sigma_s, z_M, w_M)``; returns them after convergence.
    """
    h = 0.5 * dt
    th = c.theta
    B_c = profile.B1(xc)

    def mid(x, zM, wM):
        e = profile.B1(x) - B_c
        ez = math.exp(-e) if e else 1.0
        ew = math.exp(e) if e else 1.0
        z, w = zM * ez, wM * ew
        d = w - z
        if not d > 0.0:
            raise ConstructionError("middle block at vacuum")
        rho = (0.5 * th * d) ** (1.0 / th)
        k = rho / (th * d)
        bx = profile.b1(x)
        dz, dw = -bx * z, bx * w
        return (rho, 0.5 * (w + z), k * (dw - dz), 0.5 * (dw + dz),
                -k * ez, k * ew, 0.5 * ez, 0.5 * ew)

    def fun(u):
        sp, ss, zM, wM = u
        xp = xc + sp * h
        xs = xc + ss * h
        rl, vl, rl_x, vl_x, _, _, _ = _block_prim(left, xp, profile, c)
        rm, vm, rm_x, vm_x, rm_z, rm_w, vm_z, vm_w = mid(xp, zM, wM)
        S, S_r, S_r0, D, D_r, D_r0 = locus_terms(rm, rl, c)
        g1 = sp - vl + S
        g2 = vm - vl + D
        j1 = [1.0 - h * vl_x + h * (S_r * rm_x + S_r0 * rl_x), 0.0, S_r * rm_z, S_r * rm_w]
        j2 = [h * (vm_x - vl_x + D_r * rm_x + D_r0 * rl_x), 0.0, vm_z + D_r * rm_z, vm_w + D_r * rm_w]
        rr, vr, rr_x, vr_x, _, _, _ = _block_prim(right, xs, profile, c)
        rm, vm, rm_x, vm_x, rm_z, rm_w, vm_z, vm_w = mid(xs, zM, wM)
        S, S_r, S_r0, D, D_r, D_r0 = locus_terms(rm, rr, c)
        g3 = ss - vr - S
        g4 = vm - vr - D
        j3 = [0.0, 1.0 - h * vr_x - h * (S_r * rm_x + S_r0 * rr_x), -S_r * rm_z, -S_r * rm_w]
        j4 = [0.0, h * (vm_x - vr_x - D_r * rm_x - D_r0 * rr_x), vm_z - D_r * rm_z, vm_w - D_r * rm_w]
        return [g1, g2, g3, g4], [j1, j2, j3, j4]

    def valid(u):
        return u[3] > u[2]

    x, _, _ = _newton(fun, list(guess), valid, tol, max_iter, "diamond")
    return x[0], x[1], x[2], x[3]


def rh_residual_zw(sigma: float, zwl: tuple[float, float], zwr: tuple[float, float],
                   c: GasConstants) -> float:
    """Sup-norm of ``f(u_r) - f(u_l) - sigma (u_r - u_l)`` for states given by invariants."""
    rl = rho_of(zwl[0], zwl[1], c)
    rr = rho_of(zwr[0], zwr[1], c)
    ml = rl * 0.5 * (zwl[0] + zwl[1])
    mr = rr * 0.5 * (zwr[0] + zwr[1])
    fl = flux(GasState(rl, ml), c)
    fr = flux(GasState(rr, mr), c)
    return max(abs(fr[0] - fl[0] - sigma * (rr - rl)), abs(fr[1] - fl[1] - sigma * (mr - ml)))
