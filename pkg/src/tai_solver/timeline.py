"""Arrival-timeline machinery: the beta-compounded negative binomial over
monthly breakthrough trials, annual aggregation with a never-event, anchor
fitting, and passive survival updating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import betaln, gammaln

CONSERVATION_TOL = 1e-12


@dataclass(frozen=True)
class NbbSpec:
    """Beta-compounded negative binomial over monthly trials, with a discrete
    mixture over the required breakthrough count."""

    n_support: tuple
    n_weights: tuple
    a: float
    b: float
    months_per_year: int = 12
    horizon_years: int = 60

    def __post_init__(self):
        ns = tuple(int(n) for n in self.n_support)
        ws = tuple(float(w) for w in self.n_weights)
        object.__setattr__(self, "n_support", ns)
        object.__setattr__(self, "n_weights", ws)
        if len(ns) != len(ws) or not ns:
            raise ValueError("n_support and n_weights must be nonempty and aligned")
        if list(ns) != sorted(set(ns)) or min(ns) < 1:
            raise ValueError("n_support must be sorted, distinct, with min >= 1")
        if any(w < 0 for w in ws) or abs(sum(ws) - 1.0) > CONSERVATION_TOL:
            raise ValueError("n_weights must be nonnegative and sum to 1")
        if self.a <= 0 or self.b <= 0:
            raise ValueError("beta shapes a, b must be positive")


@dataclass(frozen=True)
class ArrivalDistribution:
    """Unconditional annual arrival probabilities plus an explicit never-mass."""

    annual_probs: np.ndarray
    p_never: float
    source_label: str = ""

    def __post_init__(self):
        probs = np.asarray(self.annual_probs, dtype=float)
        object.__setattr__(self, "annual_probs", probs)
        if np.any(probs < 0) or self.p_never < -CONSERVATION_TOL:
            raise ValueError("probabilities must be nonnegative")
        if abs(probs.sum() + self.p_never - 1.0) > 1e-9:
            raise ValueError("annual probabilities plus never-mass must sum to 1")

    @property
    def horizon(self) -> int:
        return len(self.annual_probs)

    def cdf(self) -> np.ndarray:
        """Cumulative arrival probability by end of each year."""
        return np.cumsum(self.annual_probs)

    def survival_before(self, t: int) -> float:
        """Probability no arrival has occurred in years 1..t-1."""
        if t < 1:
            return 1.0
        return 1.0 - float(np.sum(self.annual_probs[: t - 1]))

    def hazard(self, t: int) -> float:
        """Arrival probability in year t conditional on surviving years < t."""
        if t < 1 or t > self.horizon:
            return 0.0
        surv = self.survival_before(t)
        if surv <= 0.0:
            return 0.0
        return float(self.annual_probs[t - 1]) / surv

    def hazards(self, through: int) -> np.ndarray:
        """Per-period hazards for years 1..through (zero beyond the horizon)."""
        return np.array([self.hazard(t) for t in range(1, through + 1)])


@dataclass(frozen=True)
class BeliefState:
    """A base arrival distribution together with years survived so far."""

    base: ArrivalDistribution
    elapsed_years: int = 0

    def __post_init__(self):
        if self.elapsed_years < 0:
            raise ValueError("elapsed_years must be nonnegative")
        if self.survival_mass() <= 0.0:
            raise ValueError("beliefs degenerate: no survival mass at elapsed_years")

    def survival_mass(self) -> float:
        return 1.0 - float(np.sum(self.base.annual_probs[: self.elapsed_years]))


def nbb_trial_pmf(n: int, a: float, b: float, k) -> np.ndarray | float:
    """P(first n breakthroughs complete on trial k) with beta-mixed success
    probability: C(k-1, n-1) * B(a+n, b+k-n) / B(a, b), in log space."""
    if a <= 0 or b <= 0:
        raise ValueError("beta shapes must be positive")
    k = np.asarray(k, dtype=float)
    valid = k >= n
    kv = np.where(valid, k, float(n))
    logpmf = (
        gammaln(kv)
        - gammaln(n)
        - gammaln(kv - n + 1.0)
        + betaln(a + n, b + kv - n)
        - betaln(a, b)
    )
    out = np.where(valid, np.exp(logpmf), 0.0)
    return out if out.ndim else float(out)


def annualize(spec: NbbSpec, source_label: str = "") -> ArrivalDistribution:
    """Aggregate monthly trial probabilities into annual arrival probabilities;
    mass beyond the horizon goes to the never-event."""
    m = spec.months_per_year
    trials = np.arange(1, spec.horizon_years * m + 1, dtype=float)
    annual = np.zeros(spec.horizon_years)
    for n, w in zip(spec.n_support, spec.n_weights):
        if w == 0.0:
            continue
        monthly = nbb_trial_pmf(n, spec.a, spec.b, trials)
        annual += w * monthly.reshape(spec.horizon_years, m).sum(axis=1)
    p_never = max(0.0, 1.0 - annual.sum())
    return ArrivalDistribution(annual, p_never, source_label=source_label)


def conditional_hazard(belief: BeliefState, t: int) -> float:
    """Probability of arrival in year t given survival through elapsed_years."""
    if t <= belief.elapsed_years:
        raise ValueError("t must exceed elapsed_years")
    if t > belief.base.horizon:
        return 0.0
    return float(belief.base.annual_probs[t - 1]) / belief.survival_mass()


def condition_on_no_arrival(belief: BeliefState) -> BeliefState:
    """Advance beliefs by one arrival-free year (passive updating)."""
    new_elapsed = belief.elapsed_years + 1
    remaining = 1.0 - float(np.sum(belief.base.annual_probs[:new_elapsed]))
    if remaining <= 0.0:
        raise ValueError("no probability mass remains (horizon exhausted, p_never = 0)")
    return BeliefState(base=belief.base, elapsed_years=new_elapsed)


def cdf_dominates(a: ArrivalDistribution, b: ArrivalDistribution, tol: float = 1e-12) -> bool:
    """True when a's CDF is >= b's at every year (a is more front-loaded)."""
    horizon = min(a.horizon, b.horizon)
    return bool(np.all(a.cdf()[:horizon] >= b.cdf()[:horizon] - tol))


# ---------------------------------------------------------------------------
# Fitting to cumulative anchors


@dataclass(frozen=True)
class FitSettings:
    n_singleton_max: int = 10
    uniform_range_max: int = 6
    pair_supports: tuple = ((3, 25), (4, 33), (6, 49), (8, 60))
    pair_weight_starts: tuple = (0.5, 0.85)
    restarts: tuple = ((0.0, 0.0), (1.0, 2.0), (-1.0, 1.0), (0.5, 4.0))
    maxiter: int = 600
    xatol: float = 1e-10
    fatol: float = 1e-14
    horizon_years: int = 60
    months_per_year: int = 12


@dataclass(frozen=True)
class FitReport:
    loss: float
    anchor_errors: tuple
    warning: bool
    spec: NbbSpec


def _cdf_at_years(spec: NbbSpec, years: np.ndarray) -> np.ndarray:
    dist = annualize(spec)
    return dist.cdf()[years - 1]


def _anchor_loss(spec: NbbSpec, years: np.ndarray, targets: np.ndarray) -> float:
    try:
        cdf = _cdf_at_years(spec, years)
    except (ValueError, OverflowError):
        # extreme trial parameters can break conservation numerically;
        # steer the search away instead of aborting it
        return 1e6
    return float(np.sum((cdf - targets) ** 2))


def _candidate_supports(settings: FitSettings):
    for n in range(1, settings.n_singleton_max + 1):
        yield (n,), (1.0,)
    for m in range(2, settings.uniform_range_max + 1):
        yield tuple(range(1, m + 1)), tuple([1.0 / m] * m)


def fit_to_anchors(anchors: Sequence[tuple], settings: FitSettings | None = None):
    """Fit an NbbSpec to (year, cumulative probability) anchors by grid search
    over breakthrough-count supports and Nelder-Mead over (log a, log b).

    Returns (spec, report). Non-convergence is reported via the warning flag,
    never raised.
    """
    settings = settings or FitSettings()
    if not anchors:
        raise ValueError("anchors must be nonempty")
    years = np.array([int(y) for y, _ in anchors])
    targets = np.array([float(q) for _, q in anchors])
    if np.any(np.diff(years) <= 0):
        raise ValueError("anchor years must be strictly increasing")
    if np.any(np.diff(targets) < 0):
        raise ValueError("anchor probabilities must be nondecreasing")
    if np.any((targets <= 0) | (targets >= 1)):
        raise ValueError("anchor probabilities must lie in (0,1)")
    if years[-1] > settings.horizon_years:
        raise ValueError("anchor years exceed the fitting horizon")

    nm_options = {"maxiter": settings.maxiter,
                  "xatol": settings.xatol,
                  "fatol": settings.fatol}
    best = None
    converged = True
    for n_support, n_weights in _candidate_supports(settings):
        def loss_ab(x, ns=n_support, ws=n_weights):
            a, b = math.exp(x[0]), math.exp(x[1])
            spec = NbbSpec(ns, ws, a, b,
                           months_per_year=settings.months_per_year,
                           horizon_years=settings.horizon_years)
            return _anchor_loss(spec, years, targets)

        for x0 in settings.restarts:
            res = minimize(loss_ab, np.array(x0), method="Nelder-Mead",
                           options=nm_options)
            if best is None or res.fun < best[0]:
                best = (res.fun, n_support, n_weights, math.exp(res.x[0]), math.exp(res.x[1]))
                converged = bool(res.success)

    # Two-point supports with a free mixing weight trace CDFs that rise,
    # plateau, then resume (a near hump plus late-arriving residual mass).
    for pair in settings.pair_supports:
        def loss_abw(x, ns=pair):
            a, b = math.exp(x[0]), math.exp(x[1])
            w = 0.5 * (1.0 + math.tanh(0.5 * x[2]))
            spec = NbbSpec(ns, (w, 1.0 - w), a, b,
                           months_per_year=settings.months_per_year,
                           horizon_years=settings.horizon_years)
            return _anchor_loss(spec, years, targets)

        for x0 in settings.restarts:
            for w0 in settings.pair_weight_starts:
                z0 = math.log(w0 / (1.0 - w0))
                res = minimize(loss_abw, np.array((*x0, z0)),
                               method="Nelder-Mead", options=nm_options)
                if res.fun < best[0]:
                    w = 0.5 * (1.0 + math.tanh(0.5 * res.x[2]))
                    best = (res.fun, pair, (w, 1.0 - w),
                            math.exp(res.x[0]), math.exp(res.x[1]))
                    converged = bool(res.success)

    loss, n_support, n_weights, a, b = best
    spec = NbbSpec(n_support, n_weights, a, b,
                   months_per_year=settings.months_per_year,
                   horizon_years=settings.horizon_years)
    errors = tuple(_cdf_at_years(spec, years) - targets)
    # An anchor curve the family cannot trace (e.g. a flat CDF) shows up as
    # residual loss; flag it rather than failing.
    warning = bool((not converged) or loss > 1e-4)
    return spec, FitReport(loss=float(loss), anchor_errors=errors, warning=warning, spec=spec)


# ---------------------------------------------------------------------------
# File formats

ANCHOR_HEADER = "year,cumulative_probability"
DISTRIBUTION_HEADER = "year,probability"


def read_anchor_file(path) -> list[tuple[int, float]]:
    """Read a `year,cumulative_probability` anchor file (header required)."""
    anchors = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh]
    if not lines or lines[0].replace(" ", "") != ANCHOR_HEADER:
        raise ValueError(f"{path}: line 1: expected header '{ANCHOR_HEADER}'")
    for i, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"{path}: line {i}: expected 'year,probability', got {line!r}")
        try:
            anchors.append((int(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ValueError(f"{path}: line {i}: {exc}") from None
    if not anchors:
        raise ValueError(f"{path}: no anchor rows")
    return anchors


def write_distribution_file(path, dist: ArrivalDistribution):
    """Write `year,probability` rows plus a final `never,probability` row."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(DISTRIBUTION_HEADER + "\n")
        for year, p in enumerate(dist.annual_probs, start=1):
            fh.write(f"{year},{p:.17g}\n")
        fh.write(f"never,{dist.p_never:.17g}\n")


def read_distribution_file(path, source_label: str | None = None) -> ArrivalDistribution:
    """Read the distribution format written by :func:`write_distribution_file`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0].replace(" ", "") != DISTRIBUTION_HEADER:
        raise ValueError(f"{path}: line 1: expected header '{DISTRIBUTION_HEADER}'")
    probs, p_never = [], None
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"{path}: line {i}: malformed row {line!r}")
        key, value = parts
        if key == "never":
            p_never = float(value)
        else:
            if int(key) != len(probs) + 1:
                raise ValueError(f"{path}: line {i}: years must be consecutive from 1")
            probs.append(float(value))
    if p_never is None:
        raise ValueError(f"{path}: missing final 'never,probability' row")
    label = source_label if source_label is not None else str(path)
    return ArrivalDistribution(np.array(probs), p_never, source_label=label)
