import csv
import dataclasses

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from nozzleflow.diagnostics import (
    DIAG_FIELDS,
    convergence_study,
    entropy_scan,
    invariant_region_scan,
    midtime_rh_scan,
    restrict,
    source_lower_bound,
    source_sign_check,
    source_terms,
    strictly_decreasing,
    tol,
    weak_residual,
    write_diagnostics,
)
from nozzleflow.gas import GasConstants
from nozzleflow.initial import constant, riemann, wave
from nozzleflow.nozzle import ConstantWeight, NozzleProfile, mu_sigma, presets
from nozzleflow.params import SchemeParams
from nozzleflow.scheme import Grid, Solver, run, sample_M

GAS = GasConstants(5 / 3)


def first_step(u0, prof, dx, c=GAS):
    P = SchemeParams.build(c, sample_M(u0, prof, c, -1.0, 1.0), dx, 0.1, prof)
    g = Grid.from_domain(-1.0, 1.0, dx)
    s = Solver(P, prof, g)
    state, _ = s.initial_state(u0)
    return P, g, s.construct(state, P.dt)


def test_tol():
    assert tol(0.01) == pytest.approx(10 * 0.01**1.1)


def test_source_terms_vanish_without_nozzle():
    flat = presets("constant")
    g1, g2 = source_terms([-1.0, 0.5], [2.0, 3.0], np.array([0.0, 0.3]), flat, GAS)
    assert np.all(g1 == 0.0) and np.all(g2 == 0.0)


def test_source_sign_check_on_admissible_nozzle():
    prof = presets("laval", gas=GAS)
    consts = mu_sigma(GAS)
    rng = np.random.default_rng(7)
    z = -rng.uniform(0, 4, 4000)
    w = rng.uniform(-4, 4, 4000)
    x = rng.uniform(-1, 1, 4000)
    rep = source_sign_check(z, w, x, prof, consts, GAS)
    assert rep.passed and rep.checked_z > 100 and rep.checked_w > 100


def test_source_sign_check_fails_when_a_exceeds_majorant():
    consts = mu_sigma(GAS)
    b = 0.5
    prof = NozzleProfile("c", 1.0, weight=ConstantWeight(b, -1.0, 1.0), a=lambda x: np.full_like(x, -3 * consts.mu * b),
                         zero_source=False)
    z = np.linspace(-2, -0.1, 200)
    rep = source_sign_check(z, 0.5 * z, np.zeros_like(z), prof, consts, GAS)
    assert not rep.passed and rep.worst_g1 < 0


@given(k=st.floats(-1 / 0.836, 1.0, exclude_max=True), z=st.floats(-5, -1e-3), x=st.floats(-1, 1))
def test_chain_lower_bound_on_g1(k, z, x):
    prof = presets("laval", gas=GAS)
    consts = mu_sigma(GAS)
    k = max(k, -1 / consts.sigma)
    assume(abs(abs(k) - 1.0) > 1e-9)
    w = k * z
    g1, _ = source_terms(z, w, np.array(x), prof, GAS)
    bound = source_lower_bound(k, z, prof.b1(x), consts, GAS)
    assert g1 >= bound - 1e-12 * (1 + abs(z)) ** 3
    assert bound >= -1e-12


def test_scan_is_zero_on_homogeneous_shock_run():
    flat = presets("constant")
    P, g, cells = first_step(riemann(1.0, 0.5, 1.0, -0.5), flat, 0.02)
    rep = invariant_region_scan(cells, P.dt, P, flat, g)
    assert rep.violation == 0.0 and rep.samples == 32 * g.n


def test_scan_on_homogeneous_fan_bounded_by_ladder_drift():
    # exact jumps along a ladder move w by O(step^3) per rung
    flat = presets("constant")
    for dx in (0.02, 0.01):
        P, g, cells = first_step(riemann(1.0, 0.5, 0.3, -0.5), flat, dx)
        rep = invariant_region_scan(cells, P.dt, P, flat, g)
        assert rep.max_z_violation == 0.0
        assert rep.violation <= P.fan_step**2 and rep.violation <= tol(dx)
    with pytest.raises(ValueError):
        invariant_region_scan(cells, P.dt, P, flat, g, points_per_cell=16)


def test_scan_fires_with_oversized_source():
    prof = presets("laval", gas=GAS)
    big = dataclasses.replace(prof, a=lambda x: 20.0 * prof.a(x))
    u0 = wave(2.0, 0.9, 1.5)
    P = SchemeParams.build(GAS, sample_M(u0, prof, GAS, -1, 1), 0.02, 0.1, big)
    g = Grid.from_domain(-1.0, 1.0, 0.02)
    worst = []
    run(u0, P, big, (-1.0, 1.0), on_step=lambda rep, s, cells: worst.append(
        invariant_region_scan(cells, rep.dt, P, big, g).violation))
    assert max(worst) > 1e-3


def test_scan_matches_solver_report():
    prof = presets("laval", gas=GAS)
    P, g, cells = first_step(wave(2.0, 0.9, 1.5), prof, 0.04)
    solver = Solver(P, prof, g)
    from nozzleflow.scheme import StepReport
    rep = StepReport(1, P.dt, P.dt)
    solver.average(cells, P.dt, rep)
    scan = invariant_region_scan(cells, P.dt, P, prof, g)
    assert scan.violation <= tol(0.04) and rep.violation <= tol(0.04)


def test_entropy_and_midtime_rh_on_nozzle_step():
    prof = presets("laval", gas=GAS)
    P, _, cells = first_step(wave(2.0, 0.5, 0.5), prof, 0.02)
    ent = entropy_scan(cells, P)
    assert ent.passed and ent.shocks > 0 and ent.ladders > 0
    assert ent.max_ladder_strength <= ent.strength_limit
    rh = midtime_rh_scan(cells, GAS)
    assert rh.jumps > 0 and rh.max_residual <= 1e-11 and not rh.failures


def test_weak_residual_first_order():
    prof = presets("laval", gas=GAS)
    ratios = []
    for dx in (0.04, 0.02, 0.01):
        P, _, cells = first_step(wave(2.0, 0.5, 0.5), prof, dx)
        ratios.append(weak_residual(cells, P.dt, prof, GAS, dx) / dx)
    assert max(ratios) < 1.0
    assert max(ratios) / min(ratios) < 1.5


def test_restrict_preserves_integrals():
    x = np.arange(-1, 1.0001, 0.01)
    u = np.sin(3 * x)
    xc = np.arange(-0.98, 0.99, 0.02)
    uc = restrict(x, u, 0.01, xc, 0.02)
    i = int(np.argmin(np.abs(x - xc[10])))
    assert uc[10] == pytest.approx(0.25 * u[i - 1] + 0.5 * u[i] + 0.25 * u[i + 1], abs=1e-14)


def test_convergence_study_on_constant_data():
    flat = presets("constant")
    rows = convergence_study(constant(1.0, 0.2), flat, GAS, (-1.0, 1.0), 0.05, 0.05, levels=2)
    assert len(rows) == 2
    assert all(r.l1_rho < 1e-12 and r.l1_m < 1e-12 for r in rows)


def test_strictly_decreasing():
    assert strictly_decreasing([3, 2, 1]) and not strictly_decreasing([3, 3, 1])


def test_diagnostics_csv(tmp_path):
    prof = presets("laval", gas=GAS)
    u0 = riemann(1.0, 0.0, 0.5, 0.0)
    P = SchemeParams.build(GAS, sample_M(u0, prof, GAS, -1, 1), 0.05, 0.05, prof)
    res = run(u0, P, prof, (-1.0, 1.0))
    path = tmp_path / "d.csv"
    write_diagnostics(res, path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0].keys()) == DIAG_FIELDS
    assert len(rows) == len(res.reports)
    assert float(rows[-1]["t"]) == 0.05
    assert sum(int(r["R-2"]) for r in rows) == res.totals["R-2"]
