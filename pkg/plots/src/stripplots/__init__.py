"""Post-processing figures for thin-strip simulator runs."""

from .figspec import FigureSpec, SpecError, parse_figure_spec, read_figure_spec
from .render import interface_gaps, plot_fields, plot_interfaces
from .runio import RunData, linf_gap, read_meta, read_snapshot

__all__ = [
    "FigureSpec",
    "SpecError",
    "parse_figure_spec",
    "read_figure_spec",
    "interface_gaps",
    "plot_fields",
    "plot_interfaces",
    "RunData",
    "linf_gap",
    "read_meta",
    "read_snapshot",
]
