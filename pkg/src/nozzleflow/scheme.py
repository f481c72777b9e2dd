"""Time marching: per-cell construction, cell averages, cut-off and run driver.

Nodes sit at ``x_j = j dx``; node ``j`` carries the average over
``[(j - 1/2) dx, (j + 1/2) dx]``.  Each step solves the wave construction in
every dual cell ``[j dx, (j+1) dx]`` and averages the result back onto the
nodes.  The outermost nodes see transmissive ghosts: their own state carried
one node outwards along the steady solution, so a ghost stays inside the
invariant region whenever its source node does.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cellfan import (
    CASE_TAGS,
    MODE_CODES,
    VACUUM_TAGS,
    CellContext,
    CellFan,
    Patch,
    construct_cell,
    fractional_step_array,
)
from .gas import GasConstants, GasState, to_invariants
from .initial import InitialData
from .jumps import ConstructionError
from .params import SchemeParams, auto_M

COUNTER_KEYS = CASE_TAGS + VACUUM_TAGS


@dataclass(frozen=True)
class Grid:
    j0: int
    n: int
    dx: float

    @classmethod
    def from_domain(cls, xa: float, xb: float, dx: float) -> "Grid":
        j0 = math.ceil(xa / dx - 1e-9)
        j1 = math.floor(xb / dx + 1e-9)
        if j1 - j0 < 1:
            raise ValueError(f"domain [{xa}, {xb}] holds fewer than two nodes at dx={dx}")
        return cls(j0, j1 - j0 + 1, dx)

    @property
    def x(self) -> np.ndarray:
        return (self.j0 + np.arange(self.n)) * self.dx


@dataclass
class Snapshot:
    t: float
    step: int
    x: np.ndarray
    rho: np.ndarray
    m: np.ndarray
    z: np.ndarray
    w: np.ndarray
    zbound: np.ndarray
    wbound: np.ndarray
    A: np.ndarray

    @property
    def v(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.rho > 0.0, self.m / np.where(self.rho > 0.0, self.rho, 1.0), 0.0)


@dataclass
class StepReport:
    step: int
    t: float
    dt: float
    max_z_violation: float = 0.0
    max_w_violation: float = 0.0
    mass_defect: float = 0.0
    clip_budget: float = 0.0
    max_rh_residual: float = 0.0
    max_patch_excursion: float = 0.0
    clamp_events: int = 0
    cfl_events: int = 0
    junctions: int = 0
    min_fan_rho: float = math.inf
    counters: Counter = field(default_factory=Counter)

    @property
    def violation(self) -> float:
        return max(self.max_z_violation, self.max_w_violation)


@dataclass
class State:
    z: np.ndarray
    w: np.ndarray
    rho: np.ndarray
    m: np.ndarray

    def copy(self) -> "State":
        return State(self.z.copy(), self.w.copy(), self.rho.copy(), self.m.copy())


# ---------------------------------------------------------------------------
# cut-off


def cutoff_arrays(E_rho, E_m, zlo, whi, level: float, c: GasConstants):
    """Vacuum below ``level``, else clip ``z >= zlo`` and ``w <= whi``.

    Returns ``(z, w, rho, m, removed)``; unclipped cells keep ``E`` exactly and
    ``removed`` is the density taken away per cell.
    """
    E_rho = np.asarray(E_rho, dtype=float)
    E_m = np.asarray(E_m, dtype=float)
    th = c.theta
    vac = E_rho < level
    safe = np.where(vac, 1.0, E_rho)
    v = E_m / safe
    s = safe**th / th
    zE, wE = v - s, v + s
    z = np.maximum(zE, zlo)
    w = np.minimum(wE, whi)
    clipped = (z != zE) | (w != wE)
    rho_c = np.where(w > z, (0.5 * th * (w - z)) ** (1.0 / th), 0.0)
    rho = np.where(clipped, rho_c, E_rho)
    m = np.where(clipped, rho_c * 0.5 * (w + z), E_m)
    z = np.where(vac, 0.0, z)
    w = np.where(vac, 0.0, w)
    rho = np.where(vac, 0.0, rho)
    m = np.where(vac, 0.0, m)
    return z, w, rho, m, np.abs(E_rho - rho)


def cutoff_state(E: GasState, zlo: float, whi: float, params: SchemeParams):
    """Single-cell cut-off; returns the new state and its invariants."""
    z, w, rho, m, _ = cutoff_arrays([E.rho], [E.m], zlo, whi, params.cutoff_level, params.c)
    return GasState(float(rho[0]), float(m[0])), (float(z[0]), float(w[0]))


# ---------------------------------------------------------------------------
# solver


class Solver:
    def __init__(self, params: SchemeParams, profile, grid: Grid, workers: int = 1):
        self.params = params
        self.profile = profile
        self.grid = grid
        self.workers = max(1, int(workers))
        x = grid.x
        B = profile.B(x)
        self.zbound = -params.M * np.exp(-B)
        self.wbound = params.M * np.exp(B)
        ends = profile.B(np.array([x[0] - grid.dx, x[-1] + grid.dx]))
        self._ghost_shift = (float(ends[0] - B[0]), float(ends[1] - B[-1]))
        t, wts = np.polynomial.legendre.leggauss(params.gauss_points)
        self._gt = t
        self._gw = wts

    # initial data -------------------------------------------------------

    def initial_state(self, u0: InitialData) -> tuple[State, float]:
        """Cell averages of ``u0`` followed by the cut-off; returns state and removed mass."""
        g = self.grid
        dx = g.dx
        c = self.params.c
        mass = np.zeros(g.n)
        mom = np.zeros(g.n)
        for i, xj in enumerate(g.x):
            a, b = xj - 0.5 * dx, xj + 0.5 * dx
            cuts = [a] + sorted(p for p in u0.breaks if a < p < b) + [b]
            for lo, hi in zip(cuts[:-1], cuts[1:]):
                X = 0.5 * (lo + hi) + 0.5 * (hi - lo) * self._gt
                # keep the quadrature on one side of a break
                X = np.clip(X, np.nextafter(lo, hi), np.nextafter(hi, lo))
                r, v = u0(X)
                mass[i] += 0.5 * (hi - lo) * float(np.dot(self._gw, r))
                mom[i] += 0.5 * (hi - lo) * float(np.dot(self._gw, r * v))
        z, w, rho, m, removed = cutoff_arrays(mass / dx, mom / dx, self.zbound, self.wbound,
                                              self.params.cutoff_level, c)
        return State(z, w, rho, m), math.fsum(removed) * dx

    # one step -----------------------------------------------------------

    @staticmethod
    def _ghost(z: float, w: float, shift: float) -> tuple[float, float]:
        zg, wg = float(z) * math.exp(-shift), float(w) * math.exp(shift)
        # a thin state with z > 0 can cross w when carried leftwards
        return (zg, wg) if wg > zg else (0.0, 0.0)

    def construct(self, state: State, dt: float, step: int = 0) -> list[CellFan]:
        g = self.grid
        zl, wl = self._ghost(state.z[0], state.w[0], self._ghost_shift[0])
        zr, wr = self._ghost(state.z[-1], state.w[-1], self._ghost_shift[1])
        zp = [zl] + state.z.tolist() + [zr]
        wp = [wl] + state.w.tolist() + [wr]

        def one(k):
            ctx = CellContext(g.j0 - 1 + k, self.params, self.profile, dt)
            return construct_cell((zp[k], wp[k]), (zp[k + 1], wp[k + 1]), ctx)

        try:
            if self.workers == 1:
                return [one(k) for k in range(g.n + 1)]
            with ThreadPoolExecutor(self.workers) as pool:
                return list(pool.map(one, range(g.n + 1)))
        except ConstructionError as exc:
            exc.step = step
            raise

    def average(self, cells: list[CellFan], dt: float, report: StepReport | None = None):
        """Cell averages at the end of the step; fills the scan fields of ``report``."""
        P = self.params
        c = P.c
        prof = self.profile
        g = self.grid
        dx = g.dx
        n = g.n
        smax = 0.5 * dx / dt
        mass = np.zeros(n)
        mom = np.zeros(n)
        rep = report if report is not None else StepReport(0, 0.0, dt)
        blk = {k: [] for k in ("xa", "xb", "zd", "wd", "Bd", "sz", "sw", "mode", "tgt")}
        patch_x, patch_z, patch_w = [], [], []
        excursion = 0.0
        for k, cell in enumerate(cells):
            xl = (g.j0 - 1 + k) * dx
            xc = cell.xc
            xr = xl + dx
            lower, upper = cell.bounds
            for wd in cell.wedges:
                lo, hi = wd.lo, wd.hi
                if lo < -smax:
                    if math.isfinite(lo):
                        rep.cfl_events += 1
                    lo = -smax
                if hi > smax:
                    if math.isfinite(hi):
                        rep.cfl_events += 1
                    hi = smax
                if hi <= lo:
                    continue
                for a, b, tgt in ((lo, min(hi, 0.0), k - 1), (max(lo, 0.0), hi, k)):
                    if b <= a or not 0 <= tgt < n:
                        continue
                    xa = xl if a == -smax else (xc if a == 0.0 else xc + a * dt)
                    xb = xr if b == smax else (xc if b == 0.0 else xc + b * dt)
                    piece = wd.piece
                    if isinstance(piece, Patch):
                        fan = piece.fan
                        r_int, m_int = fan.integrate(a, b)
                        mass[tgt] += r_int * dt
                        mom[tgt] += m_int * dt
                        if fan.left.rho == 0.0 and fan.right.rho == 0.0:
                            continue
                        xis = (0.5 * (a + b) + 0.5 * (b - a) * self._gt).tolist()
                        zs, ws = fan.invariants_at(xis)
                        patch_x.extend(xc + s * dt for s in xis)
                        patch_z.extend(zs)
                        patch_w.extend(ws)
                        excursion = max(excursion, lower - min(zs), max(ws) - upper)
                    else:
                        blk["xa"].append(xa)
                        blk["xb"].append(xb)
                        blk["zd"].append(piece.z_d)
                        blk["wd"].append(piece.w_d)
                        blk["Bd"].append(piece.B_d)
                        blk["sz"].append(piece.sz)
                        blk["sw"].append(piece.sw)
                        blk["mode"].append(MODE_CODES[piece.mode])
                        blk["tgt"].append(tgt)
        zv = wv = 0.0
        if blk["xa"]:
            A = {k: np.asarray(v) for k, v in blk.items()}
            half = 0.5 * (A["xb"] - A["xa"])
            X = (0.5 * (A["xa"] + A["xb"]))[:, None] + half[:, None] * self._gt[None, :]
            BX = prof.B(X)
            e = BX - A["Bd"][:, None]
            z = A["zd"][:, None] * np.exp(A["sz"][:, None] * e)
            w = A["wd"][:, None] * np.exp(A["sw"][:, None] * e)
            mode = np.broadcast_to(A["mode"][:, None], X.shape)
            z, w, bad = fractional_step_array(z, w, X, dt, mode, prof, c)
            rep.clamp_events += int(bad.sum())
            th = c.theta
            pos = w > z
            rho = np.where(pos, (0.5 * th * np.where(pos, w - z, 0.0)) ** (1.0 / th), 0.0)
            m = rho * 0.5 * (w + z)
            np.add.at(mass, A["tgt"], half * (rho @ self._gw))
            np.add.at(mom, A["tgt"], half * (m @ self._gw))
            zv = float(np.max(-P.M * np.exp(-BX) - z))
            wv = float(np.max(w - P.M * np.exp(BX)))
        if patch_x:
            PX = np.asarray(patch_x)
            BP = prof.B(PX)
            zv = max(zv, float(np.max(-P.M * np.exp(-BP) - np.asarray(patch_z))))
            wv = max(wv, float(np.max(np.asarray(patch_w) - P.M * np.exp(BP))))
        rep.max_z_violation = max(zv, 0.0)
        rep.max_w_violation = max(wv, 0.0)
        rep.max_patch_excursion = max(excursion, 0.0)
        return mass / dx, mom / dx

    def advance(self, state: State, dt: float, step: int = 0, t: float = 0.0):
        """One step; returns the new state, its report and the constructed cells."""
        P = self.params
        cells = self.construct(state, dt, step)
        rep = StepReport(step, t, dt)
        for cell in cells:
            rep.counters.update(cell.tags)
            rep.junctions += cell.junctions
            rep.min_fan_rho = min(rep.min_fan_rho, cell.min_fan_rho)
            for jp in cell.jumps:
                rep.max_rh_residual = max(rep.max_rh_residual, jp.residual)
        E_rho, E_m = self.average(cells, dt, rep)
        z, w, rho, m, removed = cutoff_arrays(E_rho, E_m, self.zbound, self.wbound, P.cutoff_level, P.c)
        dx = self.grid.dx
        rep.clip_budget = math.fsum(removed) * dx
        rep.mass_defect = abs(math.fsum(np.concatenate([rho, -state.rho]))) * dx
        return State(z, w, rho, m), rep, cells

    def snapshot(self, state: State, t: float, step: int) -> Snapshot:
        x = self.grid.x
        return Snapshot(t, step, x, state.rho.copy(), state.m.copy(), state.z.copy(), state.w.copy(),
                        self.zbound.copy(), self.wbound.copy(), np.asarray(self.profile.area(x), dtype=float))


# ---------------------------------------------------------------------------
# driver


@dataclass
class RunResult:
    snapshots: list[Snapshot]
    reports: list[StepReport]
    params: SchemeParams
    grid: Grid
    initial_clip: float
    final: State
    last_cells: list[CellFan] = field(default_factory=list)

    @property
    def totals(self) -> Counter:
        out = Counter({k: 0 for k in COUNTER_KEYS})
        for r in self.reports:
            out.update(r.counters)
        return out

    @property
    def max_violation(self) -> float:
        return max((r.violation for r in self.reports), default=0.0)

    @property
    def clip_budget(self) -> float:
        return math.fsum(r.clip_budget for r in self.reports)

    @property
    def mass_defect(self) -> float:
        dx = self.grid.dx
        first = self.snapshots[0].rho
        return abs(math.fsum(np.concatenate([self.final.rho, -first]))) * dx


def sample_M(u0: InitialData, profile, c: GasConstants, xa: float, xb: float, n: int = 20001) -> float:
    """Amplitude ``M`` from ``u0`` sampled on ``[xa, xb]`` (plus both sides of each break)."""
    x = np.linspace(xa, xb, n)
    extra = []
    for p in u0.breaks:
        extra += [np.nextafter(p, -np.inf), p]
    x = np.concatenate([x, np.asarray(extra, dtype=float)])
    rho, v = u0(x)
    return auto_M(x, rho, v, profile, c)


def run(u0: InitialData, params: SchemeParams, profile, domain: tuple[float, float],
        snapshot_times=(), workers: int = 1, on_step=None, keep_cells: bool = False) -> RunResult:
    """March from ``t = 0`` to ``params.T``.

    Snapshots are taken at ``0``, at every requested time and at ``T``; steps
    are shortened so that each of those times is hit exactly.
    """
    if not params.dt > 0.0:
        raise ValueError("params.dt is not set; build params with SchemeParams.build")
    grid = Grid.from_domain(domain[0], domain[1], params.dx)
    solver = Solver(params, profile, grid, workers)
    state, initial_clip = solver.initial_state(u0)
    snaps = [solver.snapshot(state, 0.0, 0)]
    reports: list[StepReport] = []
    targets = sorted({float(t) for t in snapshot_times if 0.0 < t <= params.T} | {params.T})
    t = 0.0
    n = 0
    cells: list[CellFan] = []
    for target in targets:
        if target <= 0.0:
            continue
        while t < target:
            remaining = target - t
            if remaining <= params.dt * (1.0 + 1e-9):
                dt, t_new = remaining, target
            else:
                dt, t_new = params.dt, t + params.dt
            n += 1
            state, rep, cells = solver.advance(state, dt, n, t_new)
            reports.append(rep)
            if on_step is not None:
                on_step(rep, state, cells)
            t = t_new
        snaps.append(solver.snapshot(state, t, n))
    return RunResult(snaps, reports, params, grid, initial_clip, state, cells if keep_cells else [])
