import os

import numpy as np
import pytest

NUM = "%.17g"


def _write_csv(path, header, columns):
    rows = zip(*[np.asarray(c) for c in columns])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("" if np.isnan(v) else NUM % v for v in row)
                     + "\n")


def write_run(outdir, model="sharp", times=(0.1,), nx=16, d2_amp=0.05,
              d2_shift=0.0, blank_ff_at=None):
    """Fabricate a run directory in the simulator's output format.

    The fluid-fluid interface is a sine of amplitude ``d2_amp`` (shifted by
    ``d2_shift``); the fluid-solid interface sits at y=-0.7.  For a diffuse
    ("pf") run, ``blank_ff_at`` blanks the y_ff entry of one cell to emulate
    an absent interface.
    """
    os.makedirs(outdir, exist_ok=True)
    x = (np.arange(nx) + 0.5) / nx
    files = []
    for k, t in enumerate(times):
        d2 = 0.3 + d2_amp * np.sin(2.0 * np.pi * x) + d2_shift
        width = np.full(nx, 0.7)
        c = np.full(nx, 0.5) + 0.01 * np.cos(2.0 * np.pi * x) * t
        p = 1.0 - x
        kf = np.full(nx, 0.228)
        kc = np.full(nx, 0.1)
        name = f"snap_{k:03d}.csv"
        files.append(name)
        if model == "sharp":
            _write_csv(os.path.join(outdir, name),
                       ("x", "d2", "d1_plus_d2", "c", "p", "K_f", "K_c"),
                       (x, d2, width, c, p, kf, kc))
        else:
            y_ff = -d2
            if blank_ff_at is not None:
                y_ff = y_ff.copy()
                y_ff[blank_ff_at] = np.nan
            _write_csv(os.path.join(outdir, name),
                       ("x", "y_ff", "y_fs", "c", "p", "K_f", "K_c"),
                       (x, y_ff, -width, c, p, kf, kc))
    with open(os.path.join(outdir, "meta"), "w", encoding="utf-8") as fh:
        fh.write("# synthetic fixture run\n")
        fh.write(f"model = {model}\n")
        fh.write("snapshot_times = " + ", ".join(NUM % t for t in times) + "\n")
        fh.write("snapshot_files = " + ", ".join(files) + "\n")
    return outdir


@pytest.fixture
def run_pair(tmp_path):
    """A sharp run and a diffuse run of the same scene, offset by 0.02."""
    a = write_run(tmp_path / "a", model="sharp", times=(0.1, 0.3))
    b = write_run(tmp_path / "b", model="pf", times=(0.1, 0.3),
                  d2_shift=0.02)
    return str(a), str(b)
