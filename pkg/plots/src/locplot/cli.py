"""`locplot plot` command line interface."""

import argparse
import sys

from .io import PlotInputError
from .render import KINDS, PlotSpec, render


def _parse_input(value):
    # accept "path" or "label=path" (labels distinguish overlaid runs)
    if "=" in value:
        label, path = value.split("=", 1)
        return label, path
    return "", value


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="locplot",
        description="Render figures from localization trial/summary CSVs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    plot = sub.add_parser("plot", help="render one figure")
    plot.add_argument("--kind", required=True, choices=KINDS)
    plot.add_argument("--in", dest="inputs", action="append", required=True,
                      metavar="[LABEL=]FILE",
                      help="input CSV; repeat to overlay labelled runs")
    plot.add_argument("--methods", default="",
                      help="comma-separated method filter (default: all)")
    plot.add_argument("--out", required=True, help="output image path")
    plot.add_argument("--ycol", default="",
                      help="summary column to plot (line/bars kinds)")
    plot.add_argument("--xlabel", default="sweep value")
    plot.add_argument("--report", default=None,
                      help="run report.json for CDF sweep grouping")
    plot.add_argument("--title", default="")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    spec = PlotSpec(
        kind=args.kind,
        inputs=tuple(_parse_input(v) for v in args.inputs),
        out_path=args.out,
        methods=methods,
        ycol=args.ycol,
        xlabel=args.xlabel,
        report_path=args.report,
        title=args.title,
    )
    try:
        result = render(spec)
    except PlotInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(result.out_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
