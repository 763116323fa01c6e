import json

import numpy as np
import pytest

from tai_solver.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main

CONFIG_TEMPLATE = """\
model:
  lambda: 1.0
timeline:
  annual_probs: [0.03, 0.05, 0.06, 0.05, 0.04]
  source_label: smoke
solver:
  terminal_year: 40
  branch_horizon: 120
report:
  horizon: 5
  lambdas: [0.0, 1.0]
  out_dir: out
"""


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text(CONFIG_TEMPLATE)
    return str(path)


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestSolve:
    def test_writes_all_outputs(self, config_path, tmp_path):
        out = tmp_path / "run"
        assert main(["solve", "--config", config_path, "--out", str(out)]) == EXIT_OK
        for name in ("spine.csv", "branches.csv", "summary.csv"):
            assert (out / name).exists()

    def test_spine_schema_and_rows(self, config_path, tmp_path):
        out = tmp_path / "run"
        main(["solve", "--config", config_path, "--out", str(out)])
        header, rows = read_csv(out / "spine.csv")
        assert header == ["year", "k_hat", "c_hat", "y_hat", "w_hat", "rental",
                          "rate_1y", "rate_30y", "savings", "wedge", "hazard"]
        assert [r[0] for r in rows] == ["1", "2", "3", "4", "5"]

    def test_summary_repeats_first_spine_year(self, config_path, tmp_path):
        out = tmp_path / "run"
        main(["solve", "--config", config_path, "--out", str(out)])
        _, spine_rows = read_csv(out / "spine.csv")
        header, [summary] = read_csv(out / "summary.csv")
        assert summary[0] == "smoke"
        assert float(summary[2]) == float(spine_rows[0][6])   # rate_1y
        assert float(summary[5]) == float(spine_rows[0][8])   # savings

    def test_deterministic_output(self, config_path, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["solve", "--config", config_path, "--out", str(out_a)])
        main(["solve", "--config", config_path, "--out", str(out_b)])
        for name in ("spine.csv", "branches.csv", "summary.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


class TestTable:
    def test_one_row_per_lambda(self, config_path, tmp_path):
        out = tmp_path / "run"
        assert main(["table", "--config", config_path, "--out", str(out)]) == EXIT_OK
        header, rows = read_csv(out / "table1.csv")
        assert header == ["source_label", "lambda", "rate_1y_year1", "rate_30y_year1"]
        assert [r[1] for r in rows] == ["0", "1"]
        assert float(rows[0][2]) < float(rows[1][2])


class TestFitTimeline:
    def test_fit_writes_distribution_and_report(self, tmp_path):
        anchors = tmp_path / "anchors.csv"
        anchors.write_text("year,cumulative_probability\n"
                           "3,0.570480\n8,0.873193\n20,0.971936\n40,0.992115\n")
        out = tmp_path / "dist.csv"
        assert main(["fit-timeline", "--anchors", str(anchors),
                     "--out", str(out), "--label", "fitted"]) == EXIT_OK
        assert out.exists()
        report = json.loads((tmp_path / "dist.csv.report.json").read_text())
        assert report["loss"] < 1e-4
        assert not report["warning"]
        from tai_solver import read_distribution_file

        dist = read_distribution_file(out)
        assert abs(dist.annual_probs.sum() + dist.p_never - 1.0) < 1e-12

    def test_malformed_anchors_exit_config(self, tmp_path):
        anchors = tmp_path / "anchors.csv"
        anchors.write_text("not,a,header\n")
        out = tmp_path / "dist.csv"
        assert main(["fit-timeline", "--anchors", str(anchors),
                     "--out", str(out)]) == EXIT_CONFIG


class TestExitCodes:
    def test_missing_config_file(self, tmp_path):
        code = main(["solve", "--config", str(tmp_path / "nope.yaml")])
        assert code in (EXIT_CONFIG, 4)  # surfaced as I/O or config error

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("model: [unclosed")
        assert main(["solve", "--config", str(path)]) == EXIT_CONFIG

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(CONFIG_TEMPLATE + "extra_section: {}\n")
        assert main(["solve", "--config", str(path)]) == EXIT_CONFIG

    def test_missing_timeline_file(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(CONFIG_TEMPLATE.replace(
            "annual_probs: [0.03, 0.05, 0.06, 0.05, 0.04]", "file: missing.csv"))
        assert main(["solve", "--config", str(path)]) == EXIT_CONFIG

    def test_solver_failure_exit_code(self, tmp_path):
        path = tmp_path / "hard.yaml"
        path.write_text(CONFIG_TEMPLATE.replace(
            "solver:\n  terminal_year: 40\n  branch_horizon: 120",
            "solver:\n  terminal_year: 40\n  branch_horizon: 120\n"
            "  max_iter: 1\n  damping: 0.001"))
        assert main(["solve", "--config", str(path),
                     "--out", str(tmp_path / "o")]) == EXIT_SOLVER
