"""Batch renderer CLI: `comparison` and `timeline` subcommands.

Inputs are `label=lambda=path` (comparison) or `label=path` (timeline)
triples pointing at CSVs written by the solver CLI.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, render_comparison, render_timeline


def _parse_comparison_inputs(items):
    inputs = {}
    for item in items:
        parts = item.split("=", 2)
        if len(parts) != 3:
            raise ValueError(f"expected label=lambda=path, got {item!r}")
        label, lam, path = parts
        inputs[(label, float(lam))] = path
    return inputs


def _parse_timeline_inputs(items):
    paths = {}
    for item in items:
        parts = item.split("=", 1)
        if len(parts) != 2:
            raise ValueError(f"expected label=path, got {item!r}")
        paths[parts[0]] = parts[1]
    return paths


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tai-figures",
                                     description="Render charts from solver CSV outputs")
    sub = parser.add_subparsers(dest="command", required=True)

    p_cmp = sub.add_parser("comparison", help="multi-panel rate and savings chart")
    p_cmp.add_argument("--input", action="append", required=True,
                       metavar="LABEL=LAMBDA=PATH")
    p_cmp.add_argument("--out", required=True)
    p_cmp.add_argument("--no-reference-line", action="store_true")
    p_cmp.set_defaults(command="comparison")

    p_tl = sub.add_parser("timeline", help="annual arrival probability chart")
    p_tl.add_argument("--input", action="append", required=True, metavar="LABEL=PATH")
    p_tl.add_argument("--out", required=True)
    p_tl.set_defaults(command="timeline")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "comparison":
            spec = FigureSpec(inputs=_parse_comparison_inputs(args.input),
                              out_path=args.out,
                              reference_line=not args.no_reference_line)
            render_comparison(spec)
        else:
            render_timeline(_parse_timeline_inputs(args.input), args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
