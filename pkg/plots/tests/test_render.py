import hashlib
import os

import numpy as np
import pytest

from stripplots import (FigureSpec, SpecError, interface_gaps, linf_gap,
                        plot_fields, plot_interfaces)
from stripplots.runio import RunData

from conftest import write_run


def file_hash(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def tree_hashes(root):
    return {name: file_hash(os.path.join(root, name))
            for name in sorted(os.listdir(root))}


# ---------------------------------------------------------------------------
# interface overlays


def test_overlay_and_gap_annotation(run_pair, tmp_path):
    a, b = run_pair
    spec = FigureSpec(runs=(a, b), labels=("sharp", "diffuse"),
                      times=(0.3,), out=str(tmp_path / "fig.svg"))
    rows = interface_gaps(spec)
    assert len(rows) == 1
    # constant 0.02 offset on identical x grids: the gap is exactly 0.02
    assert rows[0]["linf_ff"] == pytest.approx(0.02, abs=1e-15)
    assert rows[0]["linf_fs"] == 0.0

    out = plot_interfaces(spec)
    assert out == spec.out and os.path.exists(out)
    svg = open(out, "r", encoding="utf-8").read()
    assert "sharp" in svg and "diffuse" in svg  # legend labels survive
    # the caption carries the gap at full precision
    assert f"ff {rows[0]['linf_ff']:.17g}" in svg
    assert f"fs {rows[0]['linf_fs']:.17g}" in svg


def test_identical_runs_report_zero_gap(tmp_path):
    a = write_run(tmp_path / "a", times=(0.1,))
    b = write_run(tmp_path / "b", times=(0.1,))
    spec = FigureSpec(runs=(str(a), str(b)), out=str(tmp_path / "same.svg"))
    rows = interface_gaps(spec)
    assert rows[0]["linf_ff"] == 0.0 and rows[0]["linf_fs"] == 0.0
    svg = open(plot_interfaces(spec), encoding="utf-8").read()
    assert "ff 0," in svg


def test_gap_matches_direct_metric_across_grids(tmp_path):
    # different nx forces the periodic resampling path
    a = write_run(tmp_path / "a", nx=16)
    b = write_run(tmp_path / "b", nx=24, d2_shift=0.015)
    ra, rb = RunData(str(a)), RunData(str(b))
    xa, ffa, _ = ra.interfaces(0.1)
    xb, ffb, _ = rb.interfaces(0.1)
    spec = FigureSpec(runs=(str(a), str(b)), out=str(tmp_path / "g.svg"))
    assert interface_gaps(spec)[0]["linf_ff"] == linf_gap(xa, ffa, xb, ffb)


def test_blank_interface_cells_are_ignored_in_gap(tmp_path):
    a = write_run(tmp_path / "a", model="pf")
    b = write_run(tmp_path / "b", model="pf", d2_shift=0.01, blank_ff_at=3)
    spec = FigureSpec(runs=(str(a), str(b)), out=str(tmp_path / "n.svg"))
    rows = interface_gaps(spec)
    assert np.isfinite(rows[0]["linf_ff"])
    assert rows[0]["linf_ff"] == pytest.approx(0.01, abs=1e-15)
    plot_interfaces(spec)  # NaN cell must not break drawing


def test_missing_snapshot_file_is_an_error(tmp_path):
    a = write_run(tmp_path / "a")
    os.remove(tmp_path / "a" / "snap_000.csv")
    spec = FigureSpec(runs=(str(a),), out=str(tmp_path / "x.svg"))
    with pytest.raises(SpecError, match="missing snapshot"):
        plot_interfaces(spec)


def test_missing_run_directory_is_an_error(tmp_path):
    spec = FigureSpec(runs=(str(tmp_path / "nope"),),
                      out=str(tmp_path / "x.svg"))
    with pytest.raises(SpecError, match="no meta file"):
        plot_interfaces(spec)


def test_disjoint_times_are_an_error(tmp_path):
    a = write_run(tmp_path / "a", times=(0.1,))
    b = write_run(tmp_path / "b", times=(0.2,))
    spec = FigureSpec(runs=(str(a), str(b)), out=str(tmp_path / "x.svg"))
    with pytest.raises(SpecError, match="no common snapshot times"):
        plot_interfaces(spec)


def test_requested_time_must_exist(tmp_path):
    a = write_run(tmp_path / "a", times=(0.1,))
    spec = FigureSpec(runs=(str(a),), times=(0.5,),
                      out=str(tmp_path / "x.svg"))
    with pytest.raises(SpecError, match="no snapshot at t=0.5"):
        plot_interfaces(spec)


def test_rendering_is_deterministic_and_read_only(run_pair, tmp_path):
    a, b = run_pair
    before = tree_hashes(a), tree_hashes(b)
    spec1 = FigureSpec(runs=(a, b), out=str(tmp_path / "one.svg"))
    spec2 = FigureSpec(runs=(a, b), out=str(tmp_path / "two.svg"))
    plot_interfaces(spec1)
    plot_interfaces(spec2)
    assert file_hash(spec1.out) == file_hash(spec2.out)
    assert (tree_hashes(a), tree_hashes(b)) == before  # inputs untouched


# ---------------------------------------------------------------------------
# field profiles


def test_fields_panels_and_stats_caption(run_pair, tmp_path):
    a, b = run_pair
    spec = FigureSpec(runs=(a, b), labels=("sharp", "diffuse"),
                      times=(0.1,), columns=("c", "p"),
                      out=str(tmp_path / "fields.svg"))
    out = plot_fields(spec)
    svg = open(out, encoding="utf-8").read()
    snap = RunData(a).at(0.1)
    for col in ("c", "p"):
        line = (f"sharp {col} @ t=0.1: min {snap[col].min():.17g} "
                f"mean {snap[col].mean():.17g} max {snap[col].max():.17g}")
        assert line in svg  # stats recompute exactly from the CSV


def test_fields_missing_column(run_pair, tmp_path):
    a, b = run_pair
    spec = FigureSpec(runs=(a,), columns=("bogus",),
                      out=str(tmp_path / "x.svg"))
    with pytest.raises(SpecError, match="no column 'bogus'"):
        plot_fields(spec)


def test_fields_deterministic(run_pair, tmp_path):
    a, _ = run_pair
    spec1 = FigureSpec(runs=(a,), columns=("K_f",),
                       out=str(tmp_path / "k1.svg"))
    spec2 = FigureSpec(runs=(a,), columns=("K_f",),
                       out=str(tmp_path / "k2.svg"))
    plot_fields(spec1)
    plot_fields(spec2)
    assert file_hash(spec1.out) == file_hash(spec2.out)
