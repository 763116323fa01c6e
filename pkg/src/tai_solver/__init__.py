"""Transition-path solver for a growth economy whose households anticipate
a random arrival date for transformative AI and compete, through capital
accumulation, for wealth-based shares of post-arrival AI labor."""

from .econ_core import (
    ModelParams,
    SteadyState,
    labor_share,
    labor_share_gradient,
    marginal_utility,
    output,
    rental_rate,
    savings_rate,
    stationary_gross_rate,
    stationary_state,
    utility,
    wage,
)
from .config import ReportSettings, ScenarioConfig, load_config, parse_config
from .exceptions import ConfigurationError, InfeasiblePathError, NonConvergenceError
from .term_structure import RateTable, WedgeTerms, build_rate_table, horizon_rate, one_year_rate, wedge_decomposition
from .timeline import (
    ArrivalDistribution,
    BeliefState,
    FitReport,
    FitSettings,
    NbbSpec,
    annualize,
    cdf_dominates,
    condition_on_no_arrival,
    conditional_hazard,
    fit_to_anchors,
    nbb_trial_pmf,
    read_anchor_file,
    read_distribution_file,
    write_distribution_file,
)
from .transition import (
    PostTaiPath,
    SolverSettings,
    SpinePath,
    pre_tai_euler_residual,
    solve_post_tai_branch,
    solve_spine,
    strategic_premium,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
