"""Interface-overlay and field-profile figures from run CSVs.

Rendering is deterministic: fixed Agg backend, fixed SVG hash salt, text
kept as text (not glyph paths), and no date metadata — regenerating a
figure from identical inputs reproduces the file byte for byte.  Input
CSVs are only ever read.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.fonttype"] = "none"
matplotlib.rcParams["svg.hashsalt"] = "stripplots"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .figspec import FigureSpec, SpecError  # noqa: E402
from .runio import RunData, linf_gap, resolve_times  # noqa: E402

_COLORS = plt.rcParams["axes.prop_cycle"].by_key()["color"]


def _save(fig, out: str) -> str:
    ext = os.path.splitext(out)[1].lower()
    if ext == ".svg":
        metadata = {"Date": None}
    elif ext == ".pdf":
        metadata = {"CreationDate": None}
    else:
        metadata = None
    parent = os.path.dirname(out)
    if parent:
        os.makedirs(parent, exist_ok=True)
    fig.savefig(out, metadata=metadata)
    plt.close(fig)
    return out


def _axes_column(n: int, title: str):
    fig, axes = plt.subplots(n, 1, figsize=(6.4, 1.2 + 2.2 * n),
                             squeeze=False, constrained_layout=True)
    if title:
        fig.suptitle(title)
    return fig, [row[0] for row in axes]


def interface_gaps(spec: FigureSpec) -> list:
    """Max interface distances of every other run against the first one.

    One row per (snapshot time, comparison run): ``{"time", "label",
    "linf_ff", "linf_fs"}`` — the numbers the figure caption reports.
    """
    runs = [RunData(r) for r in spec.runs]
    times = resolve_times(spec.times, runs)
    rows = []
    for t in times:
        x0, ff0, fs0 = runs[0].interfaces(t)
        for run, label in zip(runs[1:], spec.labels[1:]):
            xb, ffb, fsb = run.interfaces(t)
            rows.append({"time": t, "label": label,
                         "linf_ff": linf_gap(x0, ff0, xb, ffb),
                         "linf_fs": linf_gap(x0, fs0, xb, fsb)})
    return rows


def plot_interfaces(spec: FigureSpec) -> str:
    """Overlay the fluid-fluid and fluid-solid interface curves per snapshot.

    Returns the written image path.  With more than one run the caption
    states the max gap of each run against the first, at full precision.
    """
    runs = [RunData(r) for r in spec.runs]
    times = resolve_times(spec.times, runs)
    fig, axes = _axes_column(len(times), spec.title)
    for ax, t in zip(axes, times):
        for k, (run, label, style) in enumerate(
                zip(runs, spec.labels, spec.styles)):
            x, ff, fs = run.interfaces(t)
            color = _COLORS[k % len(_COLORS)]
            ax.plot(x, ff, style, color=color, label=label)
            ax.plot(x, fs, style, color=color, alpha=0.45)
        ax.set_ylabel("y")
        ax.set_title(f"t = {t:g}", fontsize=10)
        if spec.xlim:
            ax.set_xlim(*spec.xlim)
        if spec.ylim:
            ax.set_ylim(*spec.ylim)
    axes[-1].set_xlabel("x")
    axes[0].legend(loc="best", fontsize=8)
    if len(runs) > 1:
        lines = [f"max gap vs '{spec.labels[0]}' at t = {row['time']:g} "
                 f"({row['label']}): ff {row['linf_ff']:.17g}, "
                 f"fs {row['linf_fs']:.17g}"
                 for row in interface_gaps(spec)]
        fig.suptitle("\n".join(([spec.title] if spec.title else []) + lines),
                     fontsize=7)
    return _save(fig, spec.out)


def _stats(values: np.ndarray):
    good = values[~np.isnan(values)]
    if good.size == 0:
        return float("nan"), float("nan"), float("nan")
    return float(good.min()), float(good.mean()), float(good.max())


def plot_fields(spec: FigureSpec) -> str:
    """Line plots of chosen snapshot CSV columns against x.

    One panel per (snapshot time, column); all runs overlaid.  Captions
    carry min/mean/max per run so the numbers survive outside the figure.
    """
    runs = [RunData(r) for r in spec.runs]
    times = resolve_times(spec.times, runs)
    panels = [(t, col) for t in times for col in spec.columns]
    fig, axes = _axes_column(len(panels), spec.title)
    captions = []
    for ax, (t, col) in zip(axes, panels):
        for k, (run, label, style) in enumerate(
                zip(runs, spec.labels, spec.styles)):
            snap = run.at(t)
            if col not in snap:
                raise SpecError(
                    f"{run.outdir}: no column {col!r} at t={t:g} "
                    f"(has {sorted(snap)})")
            ax.plot(snap["x"], snap[col],
                    style, color=_COLORS[k % len(_COLORS)], label=label)
            lo, mean, hi = _stats(snap[col])
            captions.append(f"{label} {col} @ t={t:g}: min {lo:.17g} "
                            f"mean {mean:.17g} max {hi:.17g}")
        ax.set_ylabel(col)
        ax.set_title(f"{col}, t = {t:g}", fontsize=10)
        if spec.xlim:
            ax.set_xlim(*spec.xlim)
    axes[-1].set_xlabel("x")
    axes[0].legend(loc="best", fontsize=8)
    fig.suptitle("\n".join(([spec.title] if spec.title else []) + captions),
                 fontsize=6)
    return _save(fig, spec.out)
