"""Static figure rendering over the solver CLI's CSV outputs.

Rendering is read-only: the only numeric change applied to any series is
percent formatting of rate and savings panels at draw time. Each curve is
keyed by (source label, lambda); the lambda = 0 benchmark is drawn dotted
and the rate panels carry a horizontal reference line at the pre-arrival
stationary rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SPINE_COLUMNS = ("year", "rental", "rate_1y", "rate_30y", "savings")
PANELS = ("rental", "rates", "savings")
PANEL_TITLES = {
    "rental": "Capital rental rate",
    "rates": "Interest rates (1y solid, 30y dashed)",
    "savings": "Savings rate",
}

# pre-arrival stationary annual rate for the default calibration
DEFAULT_REFERENCE_RATE = 1.018 / 0.99 - 1.0


@dataclass(frozen=True)
class FigureSpec:
    """Inputs and style toggles for a multi-panel comparison chart.

    ``inputs`` maps (source_label, lambda) to a spine.csv path. All CSVs
    must share the same year range.
    """

    inputs: dict
    out_path: str
    panels: tuple = PANELS
    benchmark_dotted: bool = True
    reference_line: bool = True
    reference_rate: float = DEFAULT_REFERENCE_RATE

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        unknown = set(self.panels) - set(PANELS)
        if unknown:
            raise ValueError(f"unknown panels: {sorted(unknown)}")


def read_spine_csv(path):
    """Read a solver spine.csv into a column dict of float arrays."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = lines[0].split(",")
    missing = [c for c in SPINE_COLUMNS if c not in header]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    rows = [ln.split(",") for ln in lines[1:]]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    return {name: data[:, header.index(name)] for name in SPINE_COLUMNS}


def read_distribution_csv(path):
    """Read a `year,probability` distribution file with a final never row.

    Returns (annual_probs, p_never).
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    if lines[0].replace(" ", "") != "year,probability":
        raise ValueError(f"{path}: expected 'year,probability' header")
    probs, p_never = [], 0.0
    for line in lines[1:]:
        key, value = line.split(",")
        if key == "never":
            p_never = float(value)
        else:
            probs.append(float(value))
    if not probs:
        raise ValueError(f"{path}: no annual probability rows")
    return np.asarray(probs), p_never


def _curve_style(lam, benchmark_dotted):
    if benchmark_dotted and float(lam) == 0.0:
        return {"linestyle": ":"}
    return {"linestyle": "-"}


def build_comparison_figure(spec: FigureSpec):
    """Build the comparison figure and return (figure, axes) without saving."""
    series = {key: read_spine_csv(path) for key, path in spec.inputs.items()}
    years_ref = None
    for key, cols in series.items():
        if years_ref is None:
            years_ref = cols["year"]
        elif not np.array_equal(cols["year"], years_ref):
            raise ValueError(f"year range of {key} does not match the other inputs")

    fig, axes = plt.subplots(1, len(spec.panels), figsize=(5 * len(spec.panels), 4))
    axes = np.atleast_1d(axes)
    for ax, panel in zip(axes, spec.panels):
        for (label, lam), cols in sorted(series.items()):
            style = _curve_style(lam, spec.benchmark_dotted)
            name = f"{label} $\\lambda$={lam}"
            if panel == "rental":
                ax.plot(cols["year"], 100 * cols["rental"], label=name, **style)
            elif panel == "rates":
                line, = ax.plot(cols["year"], 100 * cols["rate_1y"], label=name, **style)
                dash = ":" if style["linestyle"] == ":" else "--"
                ax.plot(cols["year"], 100 * cols["rate_30y"], linestyle=dash,
                        color=line.get_color())
            else:
                ax.plot(cols["year"], 100 * cols["savings"], label=name, **style)
        if panel in ("rental", "rates") and spec.reference_line:
            ax.axhline(100 * spec.reference_rate, color="grey", linewidth=0.8)
        ax.set_title(PANEL_TITLES[panel])
        ax.set_xlabel("year")
        ax.set_ylabel("percent")
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig, axes


def render_comparison(spec: FigureSpec) -> str:
    """Render the per-panel comparison chart and return the output path."""
    fig, _ = build_comparison_figure(spec)
    fig.savefig(spec.out_path)
    plt.close(fig)
    return spec.out_path


def build_timeline_figure(paths: dict, conservation_tol: float = 1e-9):
    """Build the arrival-probability figure and return (figure, axis).

    ``paths`` maps source labels to distribution files. A conservation
    violation in a file is annotated on the chart rather than raised.
    """
    if not paths:
        raise ValueError("at least one distribution file is required")
    fig, ax = plt.subplots(figsize=(7, 4))
    warnings = []
    for label, path in sorted(paths.items()):
        probs, p_never = read_distribution_csv(path)
        years = np.arange(1, len(probs) + 1)
        if len(probs) == 1:
            ax.bar(years, probs, label=label)
        else:
            ax.plot(years, probs, label=label)
        gap = abs(probs.sum() + p_never - 1.0)
        if gap > conservation_tol:
            warnings.append(f"{label}: probabilities sum to {probs.sum() + p_never:.6f}")
    if warnings:
        ax.annotate("\n".join(f"warning: {w}" for w in warnings),
                    xy=(0.02, 0.98), xycoords="axes fraction",
                    va="top", fontsize=8, color="red")
    ax.set_xlabel("year")
    ax.set_ylabel("arrival probability")
    ax.set_title("Annual arrival probabilities")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig, ax


def render_timeline(paths: dict, out_path: str, conservation_tol: float = 1e-9) -> str:
    """Render annual arrival probabilities per source and return the path."""
    fig, _ = build_timeline_figure(paths, conservation_tol=conservation_tol)
    fig.savefig(out_path)
    plt.close(fig)
    return out_path
