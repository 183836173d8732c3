"""Readers for simulator run directories (meta file + snapshot CSVs).

A run directory contains a flat ``meta`` text file (``key = value``) naming
the snapshot times and CSV files.  Sharp-model snapshots store the layer
widths ``d2`` and ``d1_plus_d2``; the corresponding interface graphs are
``y = -d2`` and ``y = -(d1+d2)``.  Diffuse-model snapshots store the
interface positions ``y_ff``/``y_fs`` directly, blank where an interface is
absent (read back as NaN).
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .figspec import SpecError

TIME_TOL = 1e-9


def read_meta(path) -> dict:
    out = {}
    try:
        fh = open(path, "r", encoding="utf-8")
    except FileNotFoundError as exc:
        raise SpecError(f"not a run directory (no meta file): {exc}") from exc
    with fh:
        for line in fh:
            body = line.split("#", 1)[0].strip()
            if body and "=" in body:
                key, val = (s.strip() for s in body.split("=", 1))
                out[key] = val
    return out


def read_snapshot(path) -> dict:
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except FileNotFoundError as exc:
        raise SpecError(f"missing snapshot CSV: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {h: [] for h in header}
        for row in reader:
            for h, tok in zip(header, row):
                cols[h].append(float(tok) if tok.strip() else np.nan)
    return {h: np.asarray(v) for h, v in cols.items()}


class RunData:
    """Snapshots of one run, indexed by time."""

    def __init__(self, outdir):
        self.outdir = str(outdir)
        meta = read_meta(os.path.join(self.outdir, "meta"))
        self.model = meta.get("model", "pf")
        self.times = [float(tok) for tok in meta["snapshot_times"].split(",")
                      if tok.strip()]
        self.files = [tok.strip() for tok in meta["snapshot_files"].split(",")
                      if tok.strip()]
        self._cache: dict = {}

    def at(self, t: float) -> dict:
        """Snapshot columns at time t (within TIME_TOL)."""
        for tv, name in zip(self.times, self.files):
            if abs(tv - t) <= TIME_TOL:
                if name not in self._cache:
                    self._cache[name] = read_snapshot(
                        os.path.join(self.outdir, name))
                return self._cache[name]
        raise SpecError(f"{self.outdir}: no snapshot at t={t:g} "
                        f"(has {self.times})")

    def interfaces(self, t: float):
        """(x, y_ff, y_fs) interface graphs at time t."""
        snap = self.at(t)
        x = snap["x"]
        if x.size and (x.min() < -1e-12 or x.max() > 1.0 + 1e-12):
            raise SpecError(f"{self.outdir}: x-range outside [0, 1]")
        if self.model == "sharp":
            return x, -snap["d2"], -snap["d1_plus_d2"]
        return x, snap["y_ff"], snap["y_fs"]


def resolve_times(spec_times, runs: list) -> list:
    """Snapshot times to draw; every run must have each of them."""
    if spec_times:
        times = sorted(set(spec_times))
    else:
        times = sorted(runs[0].times)
        for run in runs[1:]:
            times = [t for t in times
                     if any(abs(t - s) <= TIME_TOL for s in run.times)]
    if not times:
        raise SpecError("no common snapshot times across the runs")
    for t in times:
        for run in runs:
            run.at(t)  # raises with a helpful message if absent
    return times


def linf_gap(xa, ya, xb, yb) -> float:
    """Max pointwise distance between two periodic sampled curves.

    Curve b is resampled onto xa by period-1 linear interpolation; NaN
    samples (absent interface) are excluded.  This is the same metric the
    simulator's run comparison reports.
    """
    yb_on_a = np.interp(xa, xb, yb, period=1.0)
    diff = ya - yb_on_a
    good = ~np.isnan(diff)
    if not np.any(good):
        return float("nan")
    return float(np.max(np.abs(diff[good])))
