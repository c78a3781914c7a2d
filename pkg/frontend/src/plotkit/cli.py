"""plot-phase: render a phase diagram from one or two sweep CSVs."""

from __future__ import annotations

import argparse
import sys

from .csvio import SchemaError
from .render import PlotSpec, render_phase_diagram


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plot-phase", description=__doc__)
    parser.add_argument("--csv", action="append", required=True,
                        help="sweep CSV (repeat for side-by-side panels)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--target", type=float, default=0.25,
                        help="total-error level for the boundary overlay")
    parser.add_argument("--guides", default="",
                        help="comma-separated constants c1[,c2[,c3]] for the "
                             "m-floor, n-floor, and nm-product guide curves")
    parser.add_argument("--format", choices=["svg", "png"], default="svg")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    guides = tuple(float(v) for v in args.guides.split(",") if v)
    try:
        spec = PlotSpec(
            csv_paths=tuple(args.csv),
            out_path=args.out,
            target=args.target,
            guides=guides,
            fmt=args.format,
        )
        out = render_phase_diagram(spec)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"plot-phase: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
