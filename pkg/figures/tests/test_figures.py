import numpy as np
import pytest

from tai_figures import (
    DEFAULT_REFERENCE_RATE,
    FigureSpec,
    build_comparison_figure,
    build_timeline_figure,
    read_spine_csv,
    render_comparison,
    render_timeline,
)

SPINE_HEADER = ("year,k_hat,c_hat,y_hat,w_hat,rental,rate_1y,rate_30y,"
                "savings,wedge,hazard")


def write_spine(path, years, rental, rate_1y, rate_30y, savings):
    lines = [SPINE_HEADER]
    for i, year in enumerate(years):
        lines.append(f"{year},19.8,2.08,2.93,1.87,{rental[i]},{rate_1y[i]},"
                     f"{rate_30y[i]},{savings[i]},0.0,0.01")
    path.write_text("\n".join(lines) + "\n")


def flat_spine(path, n=10, rate=DEFAULT_REFERENCE_RATE, savings=0.29):
    years = np.arange(1, n + 1)
    const = np.full(n, rate)
    write_spine(path, years, const, const, const, np.full(n, savings))


@pytest.fixture()
def flat_csv(tmp_path):
    path = tmp_path / "flat.csv"
    flat_spine(path)
    return path


class TestReaders:
    def test_reads_columns(self, flat_csv):
        cols = read_spine_csv(flat_csv)
        assert np.array_equal(cols["year"], np.arange(1, 11))
        assert np.allclose(cols["rate_1y"], DEFAULT_REFERENCE_RATE)

    def test_missing_column_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("year,rental\n1,0.02\n")
        with pytest.raises(ValueError, match="rate_1y"):
            read_spine_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty"):
            read_spine_csv(path)


class TestComparison:
    def test_flat_input_plots_flat_lines(self, flat_csv, tmp_path):
        spec = FigureSpec(inputs={("base", 1.0): str(flat_csv)},
                          out_path=str(tmp_path / "fig.png"))
        fig, axes = build_comparison_figure(spec)
        for ax in axes:
            data_lines = [ln for ln in ax.get_lines()
                          if len(set(np.round(ln.get_ydata(), 12))) >= 1]
            assert data_lines
            for line in data_lines:
                assert np.ptp(line.get_ydata()) < 1e-9

    def test_rate_panels_ordered_by_lambda(self, tmp_path):
        years = np.arange(1, 11)
        paths = {}
        for lam, level in ((0.0, 0.03), (1.0, 0.10), (2.0, 0.11)):
            path = tmp_path / f"lam{lam}.csv"
            const = np.full(10, level)
            write_spine(path, years, const, const, const, np.full(10, 0.5))
            paths[("base", lam)] = str(path)
        spec = FigureSpec(inputs=paths, out_path=str(tmp_path / "fig.png"))
        fig, axes = build_comparison_figure(spec)
        rates_ax = axes[1]
        # each input contributes a 1y line then a 30y line, in sorted key order
        lines = rates_ax.get_lines()
        curves = {}
        for i, (_, lam) in enumerate(sorted(paths)):
            curves[lam] = lines[2 * i].get_ydata()
        # read back: higher lambda plots strictly above at every year
        assert np.all(curves[0.0] < curves[1.0])
        assert np.all(curves[1.0] < curves[2.0])

    def test_benchmark_lambda_zero_is_dotted(self, tmp_path, flat_csv):
        other = tmp_path / "l0.csv"
        flat_spine(other, rate=0.03)
        spec = FigureSpec(inputs={("base", 0.0): str(other),
                                  ("base", 1.0): str(flat_csv)},
                          out_path=str(tmp_path / "fig.png"))
        fig, axes = build_comparison_figure(spec)
        styles = [ln.get_linestyle() for ln in axes[0].get_lines()]
        assert ":" in styles and "-" in styles

    def test_reference_line_present(self, flat_csv, tmp_path):
        spec = FigureSpec(inputs={("base", 1.0): str(flat_csv)},
                          out_path=str(tmp_path / "fig.png"))
        fig, axes = build_comparison_figure(spec)
        ref = [ln for ln in axes[0].get_lines()
               if np.allclose(ln.get_ydata(), 100 * DEFAULT_REFERENCE_RATE)
               and len(ln.get_xdata()) == 2]
        assert ref

    def test_savings_panel_starts_high_for_strategic_run(self, tmp_path):
        years = np.arange(1, 11)
        savings = np.linspace(0.886, 0.5, 10)
        path = tmp_path / "strat.csv"
        const = np.full(10, 0.1)
        write_spine(path, years, const, const, const, savings)
        spec = FigureSpec(inputs={("base", 1.0): str(path)},
                          out_path=str(tmp_path / "fig.png"))
        fig, axes = build_comparison_figure(spec)
        first = axes[2].get_lines()[0].get_ydata()[0]
        assert first == pytest.approx(88.6)

    def test_mismatched_year_ranges_rejected(self, flat_csv, tmp_path):
        short = tmp_path / "short.csv"
        flat_spine(short, n=5)
        spec = FigureSpec(inputs={("a", 1.0): str(flat_csv),
                                  ("b", 1.0): str(short)},
                          out_path=str(tmp_path / "fig.png"))
        with pytest.raises(ValueError, match="year range"):
            build_comparison_figure(spec)

    def test_render_writes_file(self, flat_csv, tmp_path):
        out = tmp_path / "fig.png"
        render_comparison(FigureSpec(inputs={("base", 1.0): str(flat_csv)},
                                     out_path=str(out)))
        assert out.exists() and out.stat().st_size > 0

    def test_empty_inputs_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            FigureSpec(inputs={}, out_path=str(tmp_path / "fig.png"))


class TestTimeline:
    def test_degenerate_distribution_single_bar(self, tmp_path):
        path = tmp_path / "dist.csv"
        path.write_text("year,probability\n1,1.0\nnever,0.0\n")
        fig, ax = build_timeline_figure({"point": str(path)})
        assert len(ax.patches) == 1
        assert ax.patches[0].get_height() == pytest.approx(1.0)

    def test_two_sources_overlaid(self, tmp_path):
        for name, probs in (("fast", (0.5, 0.3)), ("slow", (0.2, 0.3))):
            (tmp_path / f"{name}.csv").write_text(
                "year,probability\n" +
                "".join(f"{y},{p}\n" for y, p in enumerate(probs, 1)) +
                f"never,{1 - sum(probs)}\n")
        fig, ax = build_timeline_figure({"fast": str(tmp_path / "fast.csv"),
                                         "slow": str(tmp_path / "slow.csv")})
        assert len(ax.get_lines()) == 2
        # read back: the front-loaded curve starts higher
        fast, slow = (ln.get_ydata() for ln in ax.get_lines())
        assert fast[0] > slow[0]

    def test_conservation_violation_annotated(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("year,probability\n1,0.5\n2,0.3\nnever,0.5\n")
        fig, ax = build_timeline_figure({"bad": str(path)})
        notes = [t.get_text() for t in ax.texts]
        assert any("warning" in t for t in notes)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty"):
            build_timeline_figure({"x": str(path)})

    def test_render_writes_file(self, tmp_path):
        path = tmp_path / "dist.csv"
        path.write_text("year,probability\n1,0.4\n2,0.3\nnever,0.3\n")
        out = tmp_path / "timeline.png"
        render_timeline({"x": str(path)}, str(out))
        assert out.exists() and out.stat().st_size > 0
