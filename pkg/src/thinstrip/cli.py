"""Command line front end.

Three subcommands: ``run`` executes a scenario file (either model or both),
``compare`` measures interface-curve distances between two finished runs,
and ``oracle`` evaluates the characteristic reference solution of the width
transport for convergence studies.

Exit codes: 0 success, 2 configuration problem, 3 solver divergence,
4 model-validity halt (a layer collapsed or the state left the admissible
set).
"""
from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from .chcell import CFLViolation, GeometryError, NewtonDiverged
from .grids import GridError, XGrid
from .macro import PressureBCError, solve_pressure
from .params import InvalidParams
from .potentials import DomainError
from .cellflow import closed_form_kf
from .runner import _resolve_bc, compare_runs, run_phasefield, run_scenario
from .scenario import ConfigError, geometry_profiles, read_scenario
from .sharp import ShockReached, StateCollapse, characteristics_oracle

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_HALT = 4

_CONFIG_ERRORS = (ConfigError, InvalidParams, GridError, PressureBCError,
                  GeometryError, OSError, ValueError)
_DIVERGED_ERRORS = (NewtonDiverged, CFLViolation)
_HALT_ERRORS = (StateCollapse, ShockReached, DomainError)


def _apply_overrides(cfg, args):
    changes = {}
    for attr, key in (("model", "model"), ("out", "outdir"),
                      ("workers", "workers"), ("nx", "nx"), ("ny", "ny"),
                      ("dt", "dt"), ("t_end", "t_end")):
        val = getattr(args, attr, None)
        if val is not None:
            changes[key] = val
    if "t_end" in changes:
        t_end = changes["t_end"]
        snaps = tuple(s for s in cfg.snapshots if s <= t_end + 1e-12)
        if not snaps or abs(snaps[-1] - t_end) > 1e-12:
            snaps = snaps + (t_end,)
        changes["snapshots"] = snaps
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _cmd_run(args) -> int:
    cfg = _apply_overrides(read_scenario(args.config), args)
    if args.resume is not None:
        if cfg.model != "pf":
            raise ConfigError("--resume applies to phase-field runs only")
        results = [run_phasefield(cfg, resume_from=args.resume)]
    else:
        results = run_scenario(cfg)
    for r in results:
        line = (f"{r.model}: {r.steps} steps, {len(r.files)} snapshots "
                f"-> {r.outdir} ({r.wall_time:.1f} s)")
        if r.t_star is not None and np.isfinite(r.t_star):
            line += f", characteristics cross at t={r.t_star:.4g}"
        print(line)
    return EXIT_OK


def _cmd_compare(args) -> int:
    rows = compare_runs(args.a, args.b, out_csv=args.out)
    print("time       linf_ff     l2_ff       linf_fs     l2_fs")
    for r in rows:
        print("%-10.6g %-11.4e %-11.4e %-11.4e %-11.4e"
              % (r["time"], r["linf_ff"], r["l2_ff"], r["linf_fs"], r["l2_fs"]))
    return EXIT_OK


def _cmd_oracle(args) -> int:
    cfg = read_scenario(args.config)
    if args.nx is not None:
        cfg = dataclasses.replace(cfg, nx=args.nx)
    t = cfg.t_end if args.time is None else args.time
    xgrid = XGrid(cfg.nx)
    x = xgrid.centers
    d1x, d2x = geometry_profiles(cfg, x)
    total = d1x + d2x
    if float(np.ptp(total)) > 1e-12:
        raise ConfigError("the characteristic reference needs a constant "
                          "total width")
    bc = _resolve_bc(cfg, d1x, d2x)
    kf = closed_form_kf(d1x, d2x, cfg.params)
    _, q_f, _ = solve_pressure(kf, bc, xgrid)

    def d2_initial(xq):
        return geometry_profiles(cfg, np.asarray(xq, dtype=float))[1]

    d2_ref, t_star = characteristics_oracle(d2_initial, float(total[0]), q_f,
                                            t, x, cfg.params)
    print(f"q_f = {q_f:.8g}; characteristics cross at t* = {t_star:.8g}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("x,d2\n")
            for xi, di in zip(x, d2_ref):
                fh.write("%.17g,%.17g\n" % (xi, di))
        print(f"reference at t={t:g} written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thinstrip",
        description="Thin-strip two-fluid/mineral simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario file")
    run_p.add_argument("--config", required=True, help="scenario file")
    run_p.add_argument("--model", choices=("pf", "sharp", "both"),
                       help="override the configured model")
    run_p.add_argument("--out", help="override the output directory")
    run_p.add_argument("--workers", type=int, help="parallel column workers")
    run_p.add_argument("--nx", type=int, help="override longitudinal cells")
    run_p.add_argument("--ny", type=int, help="override transversal intervals")
    run_p.add_argument("--dt", type=float, help="override the base time step")
    run_p.add_argument("--t-end", dest="t_end", type=float,
                       help="override the final time (snapshots are clipped "
                            "and the final time is appended)")
    run_p.add_argument("--resume", help="phase-field checkpoint (.npz) to "
                                        "continue from")
    run_p.set_defaults(func=_cmd_run)

    cmp_p = sub.add_parser("compare", help="interface distances between runs")
    cmp_p.add_argument("--a", required=True, help="first run directory")
    cmp_p.add_argument("--b", required=True, help="second run directory")
    cmp_p.add_argument("--out", help="write the distance table as CSV")
    cmp_p.set_defaults(func=_cmd_compare)

    orc_p = sub.add_parser("oracle",
                           help="characteristic reference for the width "
                                "transport")
    orc_p.add_argument("--config", required=True, help="scenario file")
    orc_p.add_argument("--time", type=float,
                       help="evaluation time (default: t_end)")
    orc_p.add_argument("--nx", type=int, help="override sample count")
    orc_p.add_argument("--out", help="write x,d2 reference as CSV")
    orc_p.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _DIVERGED_ERRORS as exc:
        print(f"error: solver diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except _HALT_ERRORS as exc:
        print(f"error: model validity lost: {exc}", file=sys.stderr)
        return EXIT_HALT
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
