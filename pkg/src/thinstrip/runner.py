"""Time-loop orchestration, snapshot output, balance ledger and comparisons.

Each phase-field step runs the seven-stage cycle: per-column flow solves,
permeabilities, the macroscopic pressure solve, longitudinal velocities,
per-column transport/relaxation steps, reaction/storage integrals, and the
shared implicit ion step.  Stages one and five are order-preserving parallel
maps over columns; everything else is serial and uses fixed summation order,
so output is identical for any worker count.
"""

from __future__ import annotations

import csv
import os
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cellflow import closed_form_kc, closed_form_kf, permeabilities, solve_w_phasefield
from .chcell import (CellState, CFLViolation, NewtonDiverged, cell_integrals,
                     ch_step, extract_interfaces, make_initial_cell)
from .grids import XGrid, YGrid
from .macro import PressureBC, ion_balance_residual, ion_step, solve_pressure
from .params import ModelParams
from .scenario import (ConfigError, ScenarioConfig, calibrated_flux,
                       geometry_profiles, initial_ion, scenario_text,
                       source_profile)
from .sharp import SharpState, flux_fraction_d2, sharp_step

__all__ = [
    "RunResult",
    "run_phasefield",
    "run_sharp",
    "run_scenario",
    "compare_runs",
    "read_snapshot",
    "read_meta",
]

NUM = "%.17g"
PF_COLUMNS = ("x", "y_ff", "y_fs", "c", "p", "K_f", "K_c")
SHARP_COLUMNS = ("x", "d2", "d1_plus_d2", "c", "p", "K_f", "K_c")

# auto-dt cruises below the hard 0.8 CFL precondition of the column steps so
# that mild in-run velocity growth does not abort a long run
AUTO_CFL = 0.75


@dataclass
class RunResult:
    outdir: str
    model: str
    times: list = field(default_factory=list)
    files: list = field(default_factory=list)
    t_star: float | None = None
    q_f0: float = 0.0
    steps: int = 0
    wall_time: float = 0.0

    @property
    def meta_path(self) -> str:
        return os.path.join(self.outdir, "meta")


# ---------------------------------------------------------------------------
# parallel column tasks (module level so they pickle)

def _flow_task(task):
    phi1, phi2, grid, params = task
    phi = np.array([phi1, phi2, 1.0 - phi1 - phi2])
    return solve_w_phasefield(phi, grid, params)


def _ch_task(task):
    k, prev, upstream, dx, dt, c_k, dpdx_k, params, flow_sign = task
    try:
        return ch_step(prev, upstream, dx, dt, c_k, dpdx_k, params,
                       flow_sign=flow_sign)
    except (NewtonDiverged, CFLViolation) as exc:
        raise type(exc)(f"column k={k}: {exc}") from exc


class _ColumnMapper:
    """Order-preserving map over columns, serial or process-parallel."""

    def __init__(self, workers: int, nx: int):
        self.workers = max(1, int(workers))
        self.chunk = max(1, nx // (4 * self.workers))
        self._pool = (ProcessPoolExecutor(max_workers=self.workers)
                      if self.workers > 1 else None)

    def map(self, fn, tasks):
        if self._pool is None:
            return [fn(t) for t in tasks]
        return list(self._pool.map(fn, tasks, chunksize=self.chunk))

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None


# ---------------------------------------------------------------------------
# shared plumbing

def _resolve_bc(cfg: ScenarioConfig, d1x: np.ndarray, d2x: np.ndarray) -> PressureBC:
    mode = cfg.pressure_mode
    if mode == "dirichlet":
        return PressureBC("dirichlet", p_in=cfg.p_in, p_out=cfg.p_out)
    q_f = cfg.q_f
    if mode == "auto" or q_f == 0.0:
        q_f = calibrated_flux(cfg, d1x, d2x)
    return PressureBC("flux", q_f=q_f)


def _merge_events(cfg: ScenarioConfig):
    events = [0.0]
    for s in cfg.snapshots:
        if s > events[-1] + 1e-15:
            events.append(s)
    if cfg.t_end > events[-1] + 1e-15:
        events.append(cfg.t_end)
    return events


def _segment_steps(t0: float, t1: float, dt_base: float):
    gap = t1 - t0
    n = max(1, int(np.ceil(gap / dt_base * (1.0 - 1e-12))))
    return n, gap / n


def _estimate_tstar(cfg: ScenarioConfig, q_f: float) -> float:
    """Characteristic-crossing estimate from the initial interface data."""
    xs = np.linspace(0.0, 1.0, 4001)
    d1, d2 = geometry_profiles(cfg, xs)
    speed = -(q_f / 2.0) * flux_fraction_d2(d2, d1 + d2, cfg.params)
    worst = np.gradient(speed, xs).min()
    return np.inf if worst >= 0.0 else -1.0 / worst


def _fmt(value) -> str:
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return ""
    return NUM % value


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


class _MetaWriter:
    def __init__(self, cfg: ScenarioConfig, model: str):
        self.lines = ["# resolved configuration"]
        self.lines += scenario_text(cfg).rstrip("\n").splitlines()
        self.lines += ["# run record", f"model = {model}"]

    def add(self, key, value):
        if isinstance(value, float):
            value = NUM % value
        self.lines.append(f"{key} = {value}")

    def write(self, outdir):
        with open(os.path.join(outdir, "meta"), "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.lines) + "\n")


class _Ledger:
    """Per-step global balance bookkeeping written to ledger.csv."""

    HEADER = ("step", "t", "mass1", "mass2", "mass3", "ion_total",
              "mass1_residual", "mass2_residual", "ion_residual",
              "bound_defect", "newton_iters")

    def __init__(self, outdir):
        self.path = os.path.join(outdir, "ledger.csv")
        self.rows = []

    def add(self, *vals):
        self.rows.append([_fmt(v) if isinstance(v, float) else v for v in vals])

    def write(self):
        _write_csv(self.path, self.HEADER, self.rows)


# ---------------------------------------------------------------------------
# phase-field run

def _pf_snapshot_rows(cells, c, bc, xgrid, params):
    """Self-consistent output fields at the current time (fresh flow solve)."""
    nx = xgrid.n_cells
    kf = np.empty(nx)
    kc = np.empty(nx)
    for k, cell in enumerate(cells):
        w = solve_w_phasefield(cell.phi, cell.grid, params)
        kf[k], kc[k] = permeabilities(cell.phi, w, cell.grid, params)
    p_faces, _, _ = solve_pressure(kf, bc, xgrid)
    p_mid = 0.5 * (p_faces[:-1] + p_faces[1:])
    rows = []
    for k, cell in enumerate(cells):
        pos = {pair: y for pair, y in extract_interfaces(cell)}
        rows.append([_fmt(v) for v in (
            xgrid.centers[k], pos.get(12), pos.get(13), c[k], p_mid[k],
            kf[k], kc[k])])
    return rows


def _pf_checkpoint(path, cells, c, t):
    np.savez(path,
             t=np.array([t]),
             c=np.asarray(c),
             phi1=np.stack([cl.phi1 for cl in cells]),
             phi2=np.stack([cl.phi2 for cl in cells]),
             mu1=np.stack([cl.mu1 for cl in cells]),
             mu2=np.stack([cl.mu2 for cl in cells]),
             v2=np.stack([cl.v2 for cl in cells]))


def _pf_load_checkpoint(path, ygrid):
    data = np.load(path)
    t = float(data["t"][0])
    c = data["c"]
    cells = []
    for k in range(c.size):
        p1, p2 = data["phi1"][k], data["phi2"][k]
        cells.append(CellState(
            grid=ygrid, phi1=p1, phi2=p2, phi3=1.0 - p1 - p2,
            mu1=data["mu1"][k], mu2=data["mu2"][k],
            mu3=-data["mu1"][k] - data["mu2"][k],
            v1=np.zeros_like(p1), v2=data["v2"][k]))
    return cells, c, t


def run_phasefield(cfg: ScenarioConfig, resume_from: str | None = None) -> RunResult:
    """Run the upscaled phase-field model and write snapshots/meta/ledger."""
    started = _time.perf_counter()
    outdir = cfg.outdir
    os.makedirs(outdir, exist_ok=True)
    params = cfg.params
    ygrid = YGrid(cfg.ny, ell_omega=params.ell_omega)
    ygrid.check_resolution(params.eps_bar)
    xgrid = XGrid(cfg.nx)
    x = xgrid.centers

    d1x, d2x = geometry_profiles(cfg, x)
    bc = _resolve_bc(cfg, d1x, d2x)
    source = source_profile(cfg, x)

    if resume_from is None:
        cells = [make_initial_cell(d1x[k], d2x[k], ygrid, params)
                 for k in range(cfg.nx)]
        c = initial_ion(cfg, x)
        t = 0.0
    else:
        cells, c, t = _pf_load_checkpoint(resume_from, ygrid)
        if c.size != cfg.nx:
            raise ConfigError("checkpoint grid does not match the configuration")

    mapper = _ColumnMapper(cfg.workers, cfg.nx)
    meta = _MetaWriter(cfg, "pf")
    ledger = _Ledger(outdir)
    result = RunResult(outdir=outdir, model="pf")
    events = _merge_events(cfg)

    # baseline dt from the initial flow field unless pinned by the config
    kf = np.empty(cfg.nx)
    kc = np.empty(cfg.nx)
    ws = mapper.map(_flow_task,
                    [(cl.phi1, cl.phi2, ygrid, params) for cl in cells])
    for k, cl in enumerate(cells):
        kf[k], kc[k] = permeabilities(cl.phi, ws[k], ygrid, params)
    _, q_f0, dpdx0 = solve_pressure(kf, bc, xgrid)
    result.q_f0 = q_f0
    vmax0 = max(float(np.max(np.abs(w * g))) for w, g in zip(ws, dpdx0))
    dt_base = cfg.dt if cfg.dt > 0.0 else AUTO_CFL * xgrid.dx / max(vmax0, 1e-300)

    pc_tot = np.array([cell_integrals(cl, c[k], params)[0]
                       for k, cl in enumerate(cells)])
    masses = None
    snap_idx = 0
    step = 0
    weights = ygrid.weights

    def global_masses(cur_cells):
        m1 = float(sum(np.sum(weights * cl.phi1) for cl in cur_cells))
        m2 = float(sum(np.sum(weights * cl.phi2) for cl in cur_cells))
        m3 = float(sum(np.sum(weights * cl.phi3) for cl in cur_cells))
        return m1, m2, m3

    def take_snapshot(cur_t):
        nonlocal snap_idx
        name = f"snap_{snap_idx:03d}.csv"
        _write_csv(os.path.join(outdir, name), PF_COLUMNS,
                   _pf_snapshot_rows(cells, c, bc, xgrid, params))
        _pf_checkpoint(os.path.join(outdir, f"state_{snap_idx:03d}.npz"),
                       cells, c, cur_t)
        result.times.append(cur_t)
        result.files.append(name)
        snap_idx += 1

    snapshots = set(cfg.snapshots)

    def is_snapshot(tv):
        return any(abs(tv - s) <= 1e-12 for s in snapshots)

    try:
        if t == 0.0 and is_snapshot(0.0):
            take_snapshot(0.0)
        masses = global_masses(cells)
        for t0, t1 in zip(events[:-1], events[1:]):
            if t1 <= t + 1e-15:
                continue
            seg_start = max(t0, t)
            nstep, dt = _segment_steps(seg_start, t1, dt_base)
            for i in range(nstep):
                # (1) per-column flow
                ws = mapper.map(_flow_task,
                                [(cl.phi1, cl.phi2, ygrid, params) for cl in cells])
                # (2) permeabilities
                for k, cl in enumerate(cells):
                    kf[k], kc[k] = permeabilities(cl.phi, ws[k], ygrid, params)
                # (3) pressure
                _, q_f, dpdx = solve_pressure(kf, bc, xgrid)
                # (4) longitudinal velocity
                for k, cl in enumerate(cells):
                    cl.w = ws[k]
                    cl.v1 = -ws[k] * dpdx[k]
                # (5) per-column transport/relaxation
                flow_sign = 1.0 if q_f >= 0.0 else -1.0
                off = -1 if flow_sign > 0.0 else 1
                tasks = []
                for k in range(cfg.nx):
                    ku = k + off
                    if cfg.periodic:
                        ku %= cfg.nx
                    elif ku < 0 or ku >= cfg.nx:
                        ku = k  # zero-gradient inflow ghost
                    tasks.append((k, cells[k], cells[ku], xgrid.dx, dt,
                                  c[k], dpdx[k], params, flow_sign))
                try:
                    cells = mapper.map(_ch_task, tasks)
                except (NewtonDiverged, CFLViolation) as exc:
                    raise type(exc)(f"t={t:.8g}: {exc}") from exc
                # (6) storage and reaction integrals; the reaction comes from
                # the step itself (time-weighted across any subdivisions) so
                # the mass budget below closes exactly
                pc_new = np.empty(cfg.nx)
                r_tot = np.empty(cfg.nx)
                for k, cl in enumerate(cells):
                    pc_new[k], _ = cell_integrals(cl, c[k], params)
                    r_tot[k] = cl.info.reaction_avg
                # (7) shared ion step
                c_new = ion_step(c, pc_tot, pc_new, kc, dpdx, r_tot, source,
                                 dt, xgrid, params, periodic=cfg.periodic,
                                 c_in=cfg.c_in)
                ion_res = ion_balance_residual(
                    c, c_new, pc_tot, pc_new, kc, dpdx, r_tot, source, dt,
                    xgrid, params, periodic=cfg.periodic, c_in=cfg.c_in)

                t = t1 if i == nstep - 1 else seg_start + (i + 1) * dt
                step += 1
                new_masses = global_masses(cells)
                # the half-strip reaction quadrature is R_total/2
                expected = dt * (params.da_bar / params.eps_bar) * float(np.sum(r_tot)) / 2.0
                bound = 0.0
                for cl in cells:
                    lo = min(float(np.min(cl.phi1)), float(np.min(cl.phi2)),
                             float(np.min(cl.phi3)))
                    hi = max(float(np.max(cl.phi1)), float(np.max(cl.phi2)),
                             float(np.max(cl.phi3)))
                    bound = max(bound, -lo, hi - 1.0, 0.0)
                iters = max(cl.info.iterations if cl.info else 0 for cl in cells)
                ion_tot = float(np.sum(pc_new * c_new) * xgrid.dx)
                ledger.add(step, float(t),
                           new_masses[0], new_masses[1], new_masses[2],
                           ion_tot,
                           new_masses[0] - masses[0] - expected,
                           new_masses[1] - masses[1],
                           ion_res, float(bound), iters)
                masses = new_masses
                c, pc_tot = c_new, pc_new
            if is_snapshot(t1):
                take_snapshot(t1)
    finally:
        mapper.close()

    result.t_star = _estimate_tstar(cfg, result.q_f0)
    result.steps = step
    result.wall_time = _time.perf_counter() - started
    ledger.write()
    meta.add("q_f_initial", float(result.q_f0))
    meta.add("dt_base", float(dt_base))
    meta.add("steps", step)
    meta.add("t_star_estimate", float(result.t_star))
    meta.add("snapshot_times", ", ".join(NUM % tv for tv in result.times))
    meta.add("snapshot_files", ", ".join(result.files))
    meta.add("wall_time_s", float(result.wall_time))
    meta.write(outdir)
    return result


# ---------------------------------------------------------------------------
# sharp-interface run

def _sharp_snapshot_rows(state: SharpState, bc, xgrid, params):
    kf = closed_form_kf(state.d1, state.d2, params)
    kc = closed_form_kc(state.d1, state.d2, params)
    p_faces, _, _ = solve_pressure(kf, bc, xgrid)
    p_mid = 0.5 * (p_faces[:-1] + p_faces[1:])
    rows = []
    for k in range(xgrid.n_cells):
        rows.append([_fmt(v) for v in (
            xgrid.centers[k], state.d2[k], state.d1[k] + state.d2[k],
            state.c[k], p_mid[k], kf[k], kc[k])])
    return rows


def run_sharp(cfg: ScenarioConfig) -> RunResult:
    """Run the sharp-interface companion model with the same output layout."""
    started = _time.perf_counter()
    outdir = cfg.outdir
    os.makedirs(outdir, exist_ok=True)
    params = cfg.params
    xgrid = XGrid(cfg.nx)
    x = xgrid.centers

    d1x, d2x = geometry_profiles(cfg, x)
    bc = _resolve_bc(cfg, d1x, d2x)
    source = source_profile(cfg, x)
    state = SharpState(d1x.copy(), d2x.copy(), initial_ion(cfg, x))

    kf0 = closed_form_kf(state.d1, state.d2, params)
    _, q_f0, _ = solve_pressure(kf0, bc, xgrid)
    t_star = _estimate_tstar(cfg, q_f0)

    speed0 = np.abs((q_f0 / 2.0) * flux_fraction_d2(state.d2, state.total, params))
    smax = max(float(speed0.max()), 1e-300)
    dt_base = cfg.dt if cfg.dt > 0.0 else AUTO_CFL * xgrid.dx / smax

    meta = _MetaWriter(cfg, "sharp")
    ledger = _Ledger(outdir)
    result = RunResult(outdir=outdir, model="sharp", q_f0=q_f0, t_star=t_star)
    events = _merge_events(cfg)
    snapshots = set(cfg.snapshots)
    snap_idx = 0
    step = 0
    t = 0.0

    def take_snapshot(cur_t):
        nonlocal snap_idx
        name = f"snap_{snap_idx:03d}.csv"
        _write_csv(os.path.join(outdir, name), SHARP_COLUMNS,
                   _sharp_snapshot_rows(state, bc, xgrid, params))
        result.times.append(cur_t)
        result.files.append(name)
        snap_idx += 1

    if any(abs(s) <= 1e-12 for s in snapshots):
        take_snapshot(0.0)
    for t0, t1 in zip(events[:-1], events[1:]):
        nstep, dt = _segment_steps(t0, t1, dt_base)
        for i in range(nstep):
            prev_c = state.c
            prev_d1 = state.d1
            prev_d2_mass = float(np.sum(state.d2) * xgrid.dx)
            state = sharp_step(state, dt, params, bc, xgrid, source=source,
                               periodic=cfg.periodic, c_in=cfg.c_in)
            t = t1 if i == nstep - 1 else t0 + (i + 1) * dt
            step += 1
            r = params.linear_rate(prev_c)
            ion_res = ion_balance_residual(
                prev_c, state.c, 2.0 * prev_d1, 2.0 * state.d1,
                state.k_c, state.dpdx,
                -2.0 * params.eps_bar * np.asarray(r), source, dt, xgrid,
                params, periodic=cfg.periodic, c_in=cfg.c_in)
            d2_drift = (float(np.sum(state.d2) * xgrid.dx) - prev_d2_mass
                        if cfg.periodic else 0.0)
            ledger.add(step, float(t),
                       float(np.sum(state.d1) * xgrid.dx),
                       float(np.sum(state.d2) * xgrid.dx),
                       0.0,
                       float(np.sum(2.0 * state.d1 * state.c) * xgrid.dx),
                       0.0, d2_drift, ion_res, 0.0, 0)
        if any(abs(t1 - s) <= 1e-12 for s in snapshots):
            take_snapshot(t1)

    result.steps = step
    result.wall_time = _time.perf_counter() - started
    ledger.write()
    meta.add("q_f_initial", float(q_f0))
    meta.add("dt_base", float(dt_base))
    meta.add("steps", step)
    meta.add("t_star_estimate", float(t_star))
    meta.add("post_shock", "true" if cfg.t_end >= t_star else "false")
    meta.add("snapshot_times", ", ".join(NUM % tv for tv in result.times))
    meta.add("snapshot_files", ", ".join(result.files))
    meta.add("wall_time_s", float(result.wall_time))
    meta.write(outdir)
    return result


def run_scenario(cfg: ScenarioConfig) -> list[RunResult]:
    """Dispatch on cfg.model; 'both' writes pf/ and sharp/ subdirectories."""
    if cfg.model == "pf":
        return [run_phasefield(cfg)]
    if cfg.model == "sharp":
        return [run_sharp(cfg)]
    import dataclasses as _dc
    pf_cfg = _dc.replace(cfg, model="pf", outdir=os.path.join(cfg.outdir, "pf"))
    sh_cfg = _dc.replace(cfg, model="sharp", outdir=os.path.join(cfg.outdir, "sharp"))
    return [run_phasefield(pf_cfg), run_sharp(sh_cfg)]


# ---------------------------------------------------------------------------
# reading runs back and comparing them

def read_meta(path) -> dict:
    """Flat key=value reader for run metadata (comment lines skipped)."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            body = line.split("#", 1)[0].strip()
            if body and "=" in body:
                key, val = (s.strip() for s in body.split("=", 1))
                out[key] = val
    return out


def read_snapshot(path) -> dict:
    """Columns of one snapshot CSV as float arrays; blanks become NaN."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {h: [] for h in header}
        for row in reader:
            for h, tok in zip(header, row):
                cols[h].append(float(tok) if tok.strip() else np.nan)
    return {h: np.asarray(v) for h, v in cols.items()}


def _run_curves(outdir):
    meta = read_meta(os.path.join(outdir, "meta"))
    model = meta.get("model", "pf")
    times = [float(tok) for tok in meta["snapshot_times"].split(",") if tok.strip()]
    files = [tok.strip() for tok in meta["snapshot_files"].split(",") if tok.strip()]
    curves = []
    for tv, name in zip(times, files):
        snap = read_snapshot(os.path.join(outdir, name))
        if model == "sharp":
            ff = -snap["d2"]
            fs = -snap["d1_plus_d2"]
        else:
            ff = snap["y_ff"]
            fs = snap["y_fs"]
        curves.append((tv, snap["x"], ff, fs))
    return model, curves


def _metric_pair(xa, ya, xb, yb):
    """L-infinity and L2 gap between two sampled curves on xa (period 1)."""
    yb_on_a = np.interp(xa, xb, yb, period=1.0)
    diff = ya - yb_on_a
    good = ~np.isnan(diff)
    if not np.any(good):
        return np.nan, np.nan
    dx = xa[1] - xa[0] if xa.size > 1 else 1.0
    linf = float(np.max(np.abs(diff[good])))
    l2 = float(np.sqrt(np.sum(diff[good] ** 2) * dx))
    return linf, l2


def compare_runs(dir_a, dir_b, out_csv=None):
    """Per-snapshot interface-curve distances between two run directories.

    Sharp-model snapshots are mapped to interface graphs (y = -d2 and
    y = -(d1+d2)) so that phase-field and sharp runs compare directly.
    Returns a list of dict rows; optionally writes them as CSV.
    """
    _, curves_a = _run_curves(dir_a)
    _, curves_b = _run_curves(dir_b)
    rows = []
    for tv, xa, ffa, fsa in curves_a:
        match = [cb for cb in curves_b if abs(cb[0] - tv) <= 1e-9]
        if not match:
            continue
        _, xb, ffb, fsb = match[0]
        linf_ff, l2_ff = _metric_pair(xa, ffa, xb, ffb)
        linf_fs, l2_fs = _metric_pair(xa, fsa, xb, fsb)
        rows.append({"time": tv, "linf_ff": linf_ff, "l2_ff": l2_ff,
                     "linf_fs": linf_fs, "l2_fs": l2_fs})
    if not rows:
        raise ConfigError("runs share no snapshot times; nothing to compare")
    if out_csv:
        _write_csv(out_csv, ("time", "linf_ff", "l2_ff", "linf_fs", "l2_fs"),
                   [[_fmt(r[k]) for k in ("time", "linf_ff", "l2_ff",
                                          "linf_fs", "l2_fs")] for r in rows])
    return rows
