"""Command-line entry point: `solve`, `table`, and `fit-timeline` workflows.

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 I/O error. `TAI_SOLVER_THREADS` caps branch-solve parallelism (0 = auto).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .config import ScenarioConfig, load_config
from .exceptions import ConfigurationError, InfeasiblePathError, NonConvergenceError
from .term_structure import RateTable, build_rate_table
from .timeline import FitSettings, fit_to_anchors, annualize, read_anchor_file, write_distribution_file
from .transition import solve_spine

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) if isinstance(c, str) else _fmt(c) for c in row) + "\n")


def _solve_scenario(config: ScenarioConfig):
    spine = solve_spine(config.params, config.beliefs, config.solver)
    table = build_rate_table(spine, config.beliefs, config.params,
                             horizon=config.report.horizon)
    return spine, table


def _spine_rows(spine, table: RateTable):
    for i, year in enumerate(table.year):
        t = int(year)
        yield (t, spine.k_hat[t], spine.c_hat[t], spine.y_hat[t], spine.w_hat[t],
               table.rental[i], table.rate_1y[i], table.rate_30y[i],
               table.savings[i], table.wedge[i], table.hazard[i])


def _write_outputs(out_dir, config: ScenarioConfig, spine, table: RateTable):
    os.makedirs(out_dir, exist_ok=True)
    _write_csv(
        os.path.join(out_dir, "spine.csv"),
        ["year", "k_hat", "c_hat", "y_hat", "w_hat", "rental", "rate_1y",
         "rate_30y", "savings", "wedge", "hazard"],
        _spine_rows(spine, table),
    )
    branch_rows = []
    for year in sorted(spine.branches):
        br = spine.branches[year]
        for offset in range(len(br.c_hat)):
            branch_rows.append((year, offset, br.k_hat[offset], br.c_hat[offset],
                                br.r_k[offset]))
    _write_csv(os.path.join(out_dir, "branches.csv"),
               ["arrival_year", "offset", "k_hat", "c_hat", "rental"],
               branch_rows)
    _write_csv(
        os.path.join(out_dir, "summary.csv"),
        ["source_label", "lambda", "rate_1y_year1", "rate_30y_year1",
         "rental_year1", "savings_year1", "wedge_year1"],
        [(config.beliefs.source_label, config.params.lam, table.rate_1y[0],
          table.rate_30y[0], table.rental[0], table.savings[0], table.wedge[0])],
    )
    _render_figures(out_dir, config)


def _render_figures(out_dir, config: ScenarioConfig):
    """Render charts next to the CSVs when the figure package is installed."""
    try:
        import tai_figures
    except ImportError:
        return
    from .econ_core import stationary_gross_rate

    spec = tai_figures.FigureSpec(
        inputs={(config.beliefs.source_label, config.params.lam):
                os.path.join(out_dir, "spine.csv")},
        out_path=os.path.join(out_dir, "comparison.png"),
        reference_rate=stationary_gross_rate(config.params.g_sq, config.params) - 1.0,
    )
    tai_figures.render_comparison(spec)


def cmd_solve(args) -> int:
    config = load_config(args.config)
    out_dir = args.out or config.report.out_dir
    spine, table = _solve_scenario(config)
    _write_outputs(out_dir, config, spine, table)
    return EXIT_OK


def cmd_table(args) -> int:
    config = load_config(args.config)
    out_dir = args.out or config.report.out_dir
    rows = []
    cache = None
    for lam in config.report.lambdas:
        scenario = config.with_lambda(lam)
        spine = solve_spine(scenario.params, scenario.beliefs, scenario.solver,
                            branch_cache=cache)
        cache = spine.branches
        table = build_rate_table(spine, scenario.beliefs, scenario.params,
                                 horizon=config.report.horizon)
        rows.append((config.beliefs.source_label, lam, table.rate_1y[0], table.rate_30y[0]))
    os.makedirs(out_dir, exist_ok=True)
    _write_csv(os.path.join(out_dir, "table1.csv"),
               ["source_label", "lambda", "rate_1y_year1", "rate_30y_year1"],
               rows)
    return EXIT_OK


def cmd_fit_timeline(args) -> int:
    anchors = read_anchor_file(args.anchors)
    spec, report = fit_to_anchors(anchors, FitSettings())
    label = args.label or os.path.splitext(os.path.basename(args.out))[0]
    dist = annualize(spec, source_label=label)
    write_distribution_file(args.out, dist)
    report_path = args.report or args.out + ".report.json"
    payload = {
        "n_support": list(spec.n_support),
        "n_weights": list(spec.n_weights),
        "a": spec.a,
        "b": spec.b,
        "loss": report.loss,
        "warning": report.warning,
        "anchor_errors": {str(y): err for (y, _), err in zip(anchors, report.anchor_errors)},
    }
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tai-solver",
                                     description="Transition-path solver and reporting CLI")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one scenario and write CSV outputs")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--out", default=None, help="output directory (overrides config)")
    p_solve.set_defaults(func=cmd_solve)

    p_table = sub.add_parser("table", help="year-1 rate comparison across the lambda grid")
    p_table.add_argument("--config", required=True)
    p_table.add_argument("--out", default=None)
    p_table.set_defaults(func=cmd_table)

    p_fit = sub.add_parser("fit-timeline", help="fit an arrival distribution to anchors")
    p_fit.add_argument("--anchors", required=True)
    p_fit.add_argument("--out", required=True, help="distribution file to write")
    p_fit.add_argument("--report", default=None, help="fit report path (JSON)")
    p_fit.add_argument("--label", default=None, help="source label for the distribution")
    p_fit.set_defaults(func=cmd_fit_timeline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergenceError, InfeasiblePathError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
