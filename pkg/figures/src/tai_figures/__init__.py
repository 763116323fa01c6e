"""Chart rendering for transition-path solver CSV outputs."""

from .figures import (
    DEFAULT_REFERENCE_RATE,
    build_comparison_figure,
    build_timeline_figure,
    FigureSpec,
    read_distribution_csv,
    read_spine_csv,
    render_comparison,
    render_timeline,
)

__all__ = [
    "DEFAULT_REFERENCE_RATE",
    "build_comparison_figure",
    "build_timeline_figure",
    "FigureSpec",
    "read_distribution_csv",
    "read_spine_csv",
    "render_comparison",
    "render_timeline",
]
__version__ = "0.1.0"
