"""Command line entry point: ``nozzleflow run|validate|riemann``.

Exit codes: 0 success, 2 invalid configuration or failed admissibility check,
3 the wave construction failed during a step.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .diagnostics import convergence_study, strictly_decreasing, write_diagnostics
from .gas import DomainError, GasConstants, GasState, to_invariants
from .jumps import ConstructionError
from .nozzle import mu_sigma, validate_condition_M
from .params import SchemeParams
from .riemann import RiemannSolverError, solve
from .scheme import Snapshot, run, sample_M

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CONSTRUCTION = 3

SNAP_FIELDS = ("x", "rho", "m", "v", "z", "w", "A", "zbound", "wbound")


def _err(msg: str) -> None:
    print(f"nozzleflow: {msg}", file=sys.stderr)


def write_snapshot(snap: Snapshot, path) -> None:
    cols = [snap.x, snap.rho, snap.m, snap.v, snap.z, snap.w, snap.A, snap.zbound, snap.wbound]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(SNAP_FIELDS)
        for row in zip(*cols):
            wr.writerow([repr(float(v)) for v in row])


def read_snapshot(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    return {k: np.array([float(r[i]) for r in body]) for i, k in enumerate(head)}


def snapshot_name(t: float) -> str:
    return f"snap_{t!r}.csv"


def write_gnuplot(names: list[str], path) -> None:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 'x'",
        "set ylabel 'rho'",
        "plot " + ", \\\n     ".join(f"'{n}' using 1:2 with lines title '{n}'" for n in names),
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _prepare(cfg: RunConfig, force: bool):
    """Profile, initial data and parameters; ``None`` params after printing why not."""
    c = cfg.gas
    profile = cfg.profile()
    consts = mu_sigma(c, cfg.epsilon)
    report = validate_condition_M(profile, consts)
    print(report.summary())
    if not report.passed and not (force or cfg.force):
        _err("admissibility check failed; use --force to run anyway")
        return profile, None, None
    u0 = cfg.initial_data()
    M = cfg.M if cfg.M is not None else sample_M(u0, profile, c, *cfg.domain)
    if not M > 0.0:
        _err("initial data are vacuum everywhere; set M in the config")
        return profile, u0, None
    P = SchemeParams.build(c, M, cfg.dx, cfg.T, profile, alpha=cfg.alpha, beta=cfg.beta, delta=cfg.delta)
    print(f"M={M!r} dx={P.dx!r} dt={P.dt!r} alpha={P.alpha} beta={P.beta} delta={P.delta!r}")
    return profile, u0, P


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        profile, u0, P = _prepare(cfg, args.force)
    except ConfigError as exc:
        for e in exc.errors:
            _err(e)
        return EXIT_INVALID
    except (DomainError, OSError) as exc:
        _err(str(exc))
        return EXIT_INVALID
    if P is None:
        return EXIT_INVALID
    out = Path(args.out or cfg.resolve(cfg.out))
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.levels:
            rows = convergence_study(u0, profile, cfg.gas, cfg.domain, cfg.T, cfg.dx, args.levels, M=P.M,
                                     workers=cfg.workers, alpha=P.alpha, beta=P.beta, delta=P.delta)
            with open(out / "convergence.csv", "w", newline="") as fh:
                wr = csv.writer(fh)
                wr.writerow(("dx", "l1_rho", "l1_m", "violation", "steps"))
                for r in rows:
                    wr.writerow((repr(r.dx), repr(r.l1_rho), repr(r.l1_m), repr(r.violation), r.steps))
                    print(f"dx={r.dx:.6g} L1(rho)={r.l1_rho:.6e} L1(m)={r.l1_m:.6e} "
                          f"violation={r.violation:.3e} steps={r.steps}")
            print("L1(rho) strictly decreasing:", strictly_decreasing([r.l1_rho for r in rows]))
            return EXIT_OK
        result = run(u0, P, profile, cfg.domain, cfg.snapshots, workers=cfg.workers)
    except ConstructionError as exc:
        _err(f"construction failed: {exc}")
        return EXIT_CONSTRUCTION
    except RiemannSolverError as exc:
        _err(f"Riemann solve failed: {exc}")
        return EXIT_CONSTRUCTION
    names = []
    for snap in result.snapshots:
        name = snapshot_name(snap.t)
        write_snapshot(snap, out / name)
        names.append(name)
    write_diagnostics(result, out / "diagnostics.csv")
    if cfg.gnuplot:
        write_gnuplot(names, out / "plot.gp")
    totals = {k: v for k, v in result.totals.items() if v}
    print(f"steps={len(result.reports)} max_violation={result.max_violation:.3e} "
          f"mass_defect={result.mass_defect:.3e} clip_budget={result.clip_budget:.3e} cases={totals}")
    print(f"wrote {len(names)} snapshots to {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
        c = cfg.gas
        profile = cfg.profile()
    except ConfigError as exc:
        for e in exc.errors:
            _err(e)
        return EXIT_INVALID
    except (DomainError, OSError) as exc:
        _err(str(exc))
        return EXIT_INVALID
    consts = mu_sigma(c, cfg.epsilon)
    report = validate_condition_M(profile, consts)
    print(f"mu={consts.mu!r}")
    print(f"sigma={consts.sigma!r}")
    print(f"integral_bound={consts.integral_bound!r}")
    print(f"majorant_margin={report.majorant_margin!r}")
    print(f"integral={report.integral!r}")
    print(f"integral_margin={report.integral_margin!r}")
    print("PASS" if report.passed else "FAIL " + ",".join(report.violated))
    return EXIT_OK if report.passed else EXIT_INVALID


def _state(text: str) -> GasState:
    try:
        rho, v = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'rho,v', got {text!r}") from None
    if rho < 0.0:
        raise argparse.ArgumentTypeError("density must be nonnegative")
    return GasState(rho, rho * v)


def cmd_riemann(args) -> int:
    try:
        c = GasConstants(args.gamma)
    except DomainError as exc:
        _err(str(exc))
        return EXIT_INVALID
    fan = solve(args.left, args.right, c)
    if args.range:
        lo, hi = args.range
    else:
        sp = [s for s in fan.speeds() if math.isfinite(s)]
        lo, hi = min(sp), max(sp)
        pad = 0.25 * (hi - lo) + 0.5
        lo, hi = lo - pad, hi + pad
    wr = csv.writer(sys.stdout, lineterminator="\n")
    wr.writerow(("xi", "rho", "m", "v", "z", "w"))
    for xi in np.linspace(lo, hi, args.samples):
        u = fan.sample(float(xi))
        z, w = to_invariants(u, c)
        wr.writerow([repr(float(xi)), repr(u.rho), repr(u.m), repr(u.v), repr(z), repr(w)])
    return EXIT_OK


def _range(text: str) -> tuple[float, float]:
    lo, hi = (float(t) for t in text.split(","))
    if not lo < hi:
        raise argparse.ArgumentTypeError("range needs lo < hi")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nozzleflow", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="march a configuration to its final time")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--force", action="store_true", help="run even if the admissibility check fails")
    p.add_argument("--levels", type=int, default=0, help="convergence study over this many refinements")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check the nozzle and the scheme constants")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("riemann", help="sample an exact Riemann solution to CSV")
    p.add_argument("left", type=_state, help="rho,v")
    p.add_argument("right", type=_state, help="rho,v")
    p.add_argument("--gamma", type=float, default=5.0 / 3.0)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--range", type=_range, help="xi_lo,xi_hi")
    p.set_defaults(func=cmd_riemann)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
