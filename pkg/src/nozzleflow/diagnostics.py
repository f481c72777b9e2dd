"""Runtime monitors for a computed solution.

Everything here reads the constructed cells or the per-step reports and
measures a quantity the scheme is expected to control: bound violations of the
space-dependent invariant region, the sign of the source terms, entropy
admissibility of jumps, jump residuals, a pointwise PDE residual and L1 errors
under refinement.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .cellfan import CellFan, Patch
from .gas import GasConstants, GasState, entropy_production, flux, from_invariants, rh_residual, to_invariants
from .initial import InitialData
from .nozzle import AdmissibilityConstants, f_of_k
from .params import SchemeParams
from .riemann import solve
from .scheme import COUNTER_KEYS, Grid, RunResult, run, sample_M


def tol(dx: float) -> float:
    """Allowed pre-average violation at mesh size ``dx``."""
    return 10.0 * dx**1.1


# ---------------------------------------------------------------------------
# invariant region


@dataclass
class ViolationReport:
    step: int
    max_z_violation: float
    max_w_violation: float
    x_z: float
    x_w: float
    samples: int

    @property
    def violation(self) -> float:
        return max(self.max_z_violation, self.max_w_violation)


def invariant_region_scan(cells: list[CellFan], dt: float, params: SchemeParams, profile, grid: Grid,
                          step: int = 0, points_per_cell: int = 32) -> ViolationReport:
    """Largest excursion of the end-of-step field outside ``[-M e^{-B}, M e^{B}]``.

    Samples ``points_per_cell`` midpoints in every node cell; ``cells`` is the
    list returned by ``Solver.construct`` for the same step.
    """
    if points_per_cell < 32:
        raise ValueError("at least 32 samples per cell")
    c = params.c
    M = params.M
    dx = grid.dx
    offs = (np.arange(points_per_cell) + 0.5) / points_per_cell - 0.5
    zmax = wmax = 0.0
    xz = xw = math.nan
    for i, xj in enumerate(grid.x):
        for x in xj + offs * dx:
            cell = cells[i] if x < xj else cells[i + 1]
            z, w = to_invariants(cell.state(float(x), dt, profile, c), c)
            Bx = profile.B1(float(x))
            dz = -M * math.exp(-Bx) - z
            dw = w - M * math.exp(Bx)
            if dz > zmax:
                zmax, xz = dz, float(x)
            if dw > wmax:
                wmax, xw = dw, float(x)
    return ViolationReport(step, zmax, wmax, xz, xw, grid.n * points_per_cell)


# ---------------------------------------------------------------------------
# source sign


@dataclass
class SourceSignReport:
    passed: bool
    checked_z: int
    checked_w: int
    worst_g1: float
    worst_g2: float


def source_terms(z, w, x, profile, c: GasConstants):
    """``(g1, g2)``: the z and w source rates of the fractional step."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    a = np.asarray(profile.a(x), dtype=float)
    b = np.asarray(profile.b(x), dtype=float)
    rt = 0.5 * c.theta * (w - z)
    v = 0.5 * (w + z)
    g1 = -a * v * rt + b * (v - rt) * z
    g2 = a * v * rt - b * (v + rt) * w
    return g1, g2


def source_sign_check(z, w, x, profile, consts: AdmissibilityConstants, c: GasConstants,
                      eps: float = 1e-12) -> SourceSignReport:
    """``g1 >= -eps`` where ``z <= 0`` and ``sigma w + z <= 0``; mirrored ``g2 <= eps``.

    States outside those sectors are skipped.
    """
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    g1, g2 = source_terms(z, w, x, profile, c)
    s = consts.sigma
    in1 = (z <= 0.0) & (s * w + z <= 0.0) & (w >= z)
    in2 = (w >= 0.0) & (w + s * z >= 0.0) & (w >= z)
    worst1 = float(np.min(g1[in1])) if in1.any() else math.inf
    worst2 = float(np.max(g2[in2])) if in2.any() else -math.inf
    ok = worst1 >= -eps and worst2 <= eps
    return SourceSignReport(ok, int(in1.sum()), int(in2.sum()), worst1, worst2)


def source_lower_bound(k, z, b, consts: AdmissibilityConstants, c: GasConstants):
    """``b z^2 theta |1 - k^2| (f(k) - mu) / 4`` with ``k = w/z``; bounds ``g1`` from below."""
    k = np.asarray(k, dtype=float)
    return b * np.asarray(z) ** 2 * c.theta * np.abs(1.0 - k * k) / 4.0 * (f_of_k(k, c) - consts.mu)


# ---------------------------------------------------------------------------
# jumps


@dataclass
class EntropyReport:
    shocks: int
    ladders: int
    min_production: float
    max_ladder_strength: float
    strength_limit: float
    bad_shocks: list = field(default_factory=list)
    bad_ladders: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.bad_shocks and not self.bad_ladders


def _state(zw, c):
    z, w = zw
    if w <= z:
        return GasState(0.0, 0.0)
    return from_invariants((z, w), c)


def entropy_scan(cells: list[CellFan], params: SchemeParams, shock_tol: float = 1e-12) -> EntropyReport:
    """Shocks must produce mechanical entropy; ladder jumps are exempt but must be weak.

    A ladder jump may exceed ``dx**alpha`` only by ``tol(dx)``, which covers the
    drift of the steady blocks between the anchor and the jump.
    """
    c = params.c
    limit = params.fan_step + tol(params.dx)
    rep = EntropyReport(0, 0, math.inf, 0.0, limit)
    for cell in cells:
        for jp in cell.jumps:
            if jp.kind == "ladder":
                rep.ladders += 1
                s = max(abs(jp.right[0] - jp.left[0]), abs(jp.right[1] - jp.left[1]))
                rep.max_ladder_strength = max(rep.max_ladder_strength, s)
                if s > limit:
                    rep.bad_ladders.append((cell.j, jp.sigma, s))
                continue
            rep.shocks += 1
            uL, uR = _state(jp.left, c), _state(jp.right, c)
            prod = entropy_production(jp.sigma, uL, uR, c)
            scale = max(1.0, abs(uL.rho), abs(uR.rho), abs(uL.m), abs(uR.m)) ** 3
            rep.min_production = min(rep.min_production, prod)
            if prod < -shock_tol * scale:
                rep.bad_shocks.append((cell.j, jp.sigma, prod))
    return rep


@dataclass
class JumpResidualReport:
    jumps: int
    max_residual: float
    failures: list


def midtime_rh_scan(cells: list[CellFan], c: GasConstants, limit: float = 1e-11) -> JumpResidualReport:
    """Jump conditions of every constructed discontinuity, re-evaluated from its mid-time states."""
    n = 0
    worst = 0.0
    bad = []
    for cell in cells:
        for jp in cell.jumps:
            res = max(abs(r) for r in rh_residual(jp.sigma, _state(jp.left, c), _state(jp.right, c), c))
            n += 1
            worst = max(worst, res)
            if not res <= limit:
                bad.append((cell.j, jp.kind, jp.sigma, res))
    return JumpResidualReport(n, worst, bad)


# ---------------------------------------------------------------------------
# pointwise residual


def _cons(u: GasState) -> np.ndarray:
    return np.array([u.rho, u.m])


def weak_residual(cells: list[CellFan], dt: float, profile, c: GasConstants, dx: float,
                  fractions=(0.25, 0.5, 0.75)) -> float:
    """Max of ``|u_t + f(u)_x - g(x, u)|`` at mid-step over the interiors of steady wedges.

    Derivatives are central differences with steps ``1e-6`` of the mesh sizes.
    """
    tau = 0.5 * dt
    smax = 0.5 * dx / dt
    hx = 1e-6 * dx
    ht = 1e-6 * dt
    worst = 0.0
    for cell in cells:
        for wd in cell.wedges:
            if isinstance(wd.piece, Patch):
                continue
            lo, hi = max(wd.lo, -smax), min(wd.hi, smax)
            if hi - lo < 1e-3 * smax:
                continue
            for fr in fractions:
                x = cell.xc + (lo + fr * (hi - lo)) * tau
                up = cell.state(x + hx, tau, profile, c)
                um = cell.state(x - hx, tau, profile, c)
                if up.rho <= 0.0 or um.rho <= 0.0:
                    continue
                ut = (_cons(cell.state(x, tau + ht, profile, c)) - _cons(cell.state(x, tau - ht, profile, c))) / (2 * ht)
                fx = (np.array(flux(up, c)) - np.array(flux(um, c))) / (2 * hx)
                u = cell.state(x, tau, profile, c)
                a = float(profile.a(x))
                g = np.array([a * u.m, a * u.m * u.m / u.rho if u.rho > 0.0 else 0.0])
                worst = max(worst, float(np.max(np.abs(ut + fx - g))))
    return worst


# ---------------------------------------------------------------------------
# refinement


@dataclass
class ConvergenceRow:
    dx: float
    l1_rho: float
    l1_m: float
    violation: float
    steps: int


def restrict(x_fine, u_fine, dx_fine, x_coarse, dx_coarse):
    """Average of a piecewise constant fine-grid field over the coarse node cells."""
    edges = np.concatenate([x_fine - 0.5 * dx_fine, [x_fine[-1] + 0.5 * dx_fine]])
    cum = np.concatenate([[0.0], np.cumsum(u_fine * dx_fine)])
    lo = np.interp(x_coarse - 0.5 * dx_coarse, edges, cum)
    hi = np.interp(x_coarse + 0.5 * dx_coarse, edges, cum)
    return (hi - lo) / dx_coarse


def exact_riemann_averages(u0: InitialData, x, dx: float, T: float, c: GasConstants):
    """Node-cell averages of the exact solution for a ``riemann`` datum at time ``T``."""
    rl, vl, rr, vr, x0 = u0.args
    fan = solve(GasState(rl, rl * vl), GasState(rr, rr * vr), c)
    rho = np.empty(len(x))
    m = np.empty(len(x))
    for i, xj in enumerate(x):
        r, q = fan.integrate((xj - 0.5 * dx - x0) / T, (xj + 0.5 * dx - x0) / T)
        rho[i] = r * T / dx
        m[i] = q * T / dx
    return rho, m


def convergence_study(u0: InitialData, profile, c: GasConstants, domain: tuple[float, float], T: float,
                      dx: float, levels: int = 3, M: float | None = None, workers: int = 1,
                      **param_kw) -> list[ConvergenceRow]:
    """L1 errors and max pre-average violation at ``dx, dx/2, ...``.

    A ``riemann`` datum on a source-free profile is compared with the exact
    solution; anything else with a run one level finer than the last.
    """
    if M is None:
        M = sample_M(u0, profile, c, domain[0], domain[1])
    exact = u0.name == "riemann" and profile.zero_source
    sizes = [dx / 2**k for k in range(levels)]
    results = []
    for h in sizes + ([] if exact else [dx / 2**levels]):
        P = SchemeParams.build(c, M, h, T, profile, **param_kw)
        results.append(run(u0, P, profile, domain, workers=workers))
    if not exact:
        ref = results[-1].snapshots[-1]
        ref_dx = results[-1].grid.dx
    rows = []
    for h, res in zip(sizes, results):
        s = res.snapshots[-1]
        if exact:
            er, em = exact_riemann_averages(u0, s.x, h, T, c) if T > 0 else (s.rho, s.m)
        else:
            er = restrict(ref.x, ref.rho, ref_dx, s.x, h)
            em = restrict(ref.x, ref.m, ref_dx, s.x, h)
        # skip boundary nodes whose cells stick out of the reference grid
        keep = slice(None) if exact else slice(1, -1)
        rows.append(ConvergenceRow(h, float(np.sum(np.abs(s.rho - er)[keep]) * h),
                                   float(np.sum(np.abs(s.m - em)[keep]) * h), res.max_violation,
                                   len(res.reports)))
    return rows


def strictly_decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# CSV


DIAG_FIELDS = ("step", "max_z_violation", "max_w_violation", "mass_defect", "clip_budget", "t", "dt",
               "max_rh_residual", "max_patch_excursion", "clamp_events", "cfl_events", "junctions",
               "min_fan_rho") + COUNTER_KEYS


def diagnostics_rows(result: RunResult) -> list[dict]:
    rows = []
    for r in result.reports:
        row = {
            "step": r.step,
            "max_z_violation": repr(r.max_z_violation),
            "max_w_violation": repr(r.max_w_violation),
            "mass_defect": repr(r.mass_defect),
            "clip_budget": repr(r.clip_budget),
            "t": repr(r.t),
            "dt": repr(r.dt),
            "max_rh_residual": repr(r.max_rh_residual),
            "max_patch_excursion": repr(r.max_patch_excursion),
            "clamp_events": r.clamp_events,
            "cfl_events": r.cfl_events,
            "junctions": r.junctions,
            "min_fan_rho": repr(r.min_fan_rho),
        }
        for k in COUNTER_KEYS:
            row[k] = r.counters.get(k, 0)
        rows.append(row)
    return rows


def write_diagnostics(result: RunResult, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=DIAG_FIELDS)
        wr.writeheader()
        wr.writerows(diagnostics_rows(result))
