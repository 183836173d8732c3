"""Command line entry: ``plot interfaces|fields --spec PATH``.

Exit codes: 0 success, 2 bad spec / unreadable input.
"""

from __future__ import annotations

import argparse
import sys

from .figspec import SpecError, read_figure_spec
from .render import plot_fields, plot_interfaces


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plot",
                                 description="Figures from simulator run CSVs.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, txt in (("interfaces", "interface-curve overlays per snapshot"),
                      ("fields", "CSV columns (c, p, K_f, ...) against x")):
        p = sub.add_parser(name, help=txt)
        p.add_argument("--spec", required=True, help="figure spec file")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = read_figure_spec(args.spec)
        if args.command == "interfaces":
            out = plot_interfaces(spec)
        else:
            out = plot_fields(spec)
    except (SpecError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
