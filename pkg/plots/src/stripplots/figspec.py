"""Figure descriptions parsed from flat ``key = value`` text.

The format is the same one the simulator uses for scenario files: one
``key = value`` per line, ``#`` starts a comment, later duplicates win,
comma-separated lists for tuple-valued keys.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

_STYLE_CYCLE = ("-", "--", "-.", ":")


class SpecError(ValueError):
    """Raised for unparseable or inconsistent figure specs."""


@dataclass
class FigureSpec:
    """What to draw: which runs, which snapshot times, where to save."""

    runs: tuple = ()
    labels: tuple = ()
    styles: tuple = ()
    times: tuple = ()          # empty means: all times shared by the runs
    columns: tuple = ("c",)    # CSV columns for field plots
    out: str = ""
    xlim: tuple = ()
    ylim: tuple = ()
    title: str = ""

    def __post_init__(self):
        if not self.runs:
            raise SpecError("spec needs at least one run directory ('runs = ...')")
        if not self.out:
            raise SpecError("spec needs an output image path ('out = ...')")
        if not self.labels:
            self.labels = tuple(os.path.basename(os.path.normpath(r))
                                for r in self.runs)
        if not self.styles:
            self.styles = tuple(_STYLE_CYCLE[i % len(_STYLE_CYCLE)]
                                for i in range(len(self.runs)))
        if len(self.labels) != len(self.runs):
            raise SpecError(f"{len(self.runs)} runs but {len(self.labels)} labels")
        if len(self.styles) != len(self.runs):
            raise SpecError(f"{len(self.runs)} runs but {len(self.styles)} styles")
        if not self.columns:
            raise SpecError("'columns' must not be empty")
        for key in ("xlim", "ylim"):
            rng = getattr(self, key)
            if rng and (len(rng) != 2 or not rng[0] < rng[1]):
                raise SpecError(f"{key}: expected 'low, high' with low < high")
        if any(t < 0.0 for t in self.times):
            raise SpecError("snapshot times must be nonnegative")


_STR_TUPLES = ("runs", "labels", "styles", "columns")
_FLOAT_TUPLES = ("times", "xlim", "ylim")
_STRINGS = ("out", "title")


def parse_figure_spec(text: str) -> FigureSpec:
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise SpecError(f"line {lineno}: expected 'key = value'")
        key, val = (part.strip() for part in body.split("=", 1))
        if key not in _STR_TUPLES + _FLOAT_TUPLES + _STRINGS:
            raise SpecError(f"line {lineno}: unknown key {key!r}")
        raw[key] = val

    kwargs: dict = {}
    for key, val in raw.items():
        if key in _STR_TUPLES:
            kwargs[key] = tuple(tok.strip() for tok in val.split(",")
                                if tok.strip())
        elif key in _FLOAT_TUPLES:
            try:
                kwargs[key] = tuple(float(tok) for tok in val.split(",")
                                    if tok.strip())
            except ValueError as exc:
                raise SpecError(f"{key}: {exc}") from exc
        else:
            kwargs[key] = val
    return FigureSpec(**kwargs)


def read_figure_spec(path) -> FigureSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_figure_spec(fh.read())
