"""Command line front end.

Exit codes: 0 success, 1 usage problem, 2 data problem (missing file,
schema mismatch, empty input).
"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, DataError, FigureSpec, render


class _Parser(argparse.ArgumentParser):
    # keep exit code 2 reserved for data problems
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dgsplot", description="Render benchmark CSVs into figures")
    sub = parser.add_subparsers(dest="command", required=True)
    plot = sub.add_parser("plot", help="render one CSV into one PNG")
    plot.add_argument("--kind", required=True, choices=KINDS)
    plot.add_argument("--in", dest="input_csv", required=True, metavar="CSV")
    plot.add_argument("--out", dest="out_path", required=True, metavar="PNG")
    plot.add_argument("--band", action="store_true",
                      help="shade mean +- 1 std around each line")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        path = render(FigureSpec(input_csv=args.input_csv, kind=args.kind,
                                 out_path=args.out_path, band=args.band))
    except DataError as exc:
        print("data error: %s" % (exc,), file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
