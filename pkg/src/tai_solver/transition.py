"""Equilibrium transition paths.

The economy follows a no-arrival "spine" plus one deterministic post-arrival
branch per year with positive arrival hazard. Both are solved in detrended
units as two-point boundary value problems: stack the per-period Euler
residuals over the capital sequence and apply damped Newton with a
tridiagonal finite-difference Jacobian.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .econ_core import ModelParams, stationary_state
from .exceptions import ConfigurationError, InfeasiblePathError, NonConvergenceError
from .timeline import ArrivalDistribution

_C_FLOOR = 1e-12
_PENALTY = 1e8


@dataclass(frozen=True)
class SolverSettings:
    terminal_year: int = 150
    branch_horizon: int = 120
    tol: float = 1e-8
    max_iter: int = 500
    damping: float = 0.5

    def __post_init__(self):
        if self.terminal_year < 3 or self.branch_horizon < 3:
            raise ConfigurationError("horizons must be at least 3 years")
        if not 0.0 < self.damping <= 1.0:
            raise ConfigurationError("damping must lie in (0,1]")
        if self.tol <= 0 or self.max_iter < 1:
            raise ConfigurationError("tol must be positive and max_iter >= 1")


@dataclass
class PostTaiPath:
    """Deterministic detrended path following an arrival in a given year."""

    arrival_year: int
    k_hat: np.ndarray          # offsets 0..H, capital at offset 0 predetermined
    c_hat: np.ndarray          # offsets 0..H-1
    y_hat: np.ndarray
    w_hat: np.ndarray
    r_k: np.ndarray
    converged: bool
    max_residual: float
    premium_rest: float = 0.0  # offsets >= 1 of the premium sum, incl. the tail


@dataclass
class SpinePath:
    """No-arrival equilibrium path with its attached post-arrival branches."""

    k_hat: np.ndarray          # years 0..T
    c_hat: np.ndarray          # years 0..T-1
    y_hat: np.ndarray
    w_hat: np.ndarray
    r_k: np.ndarray
    premium: np.ndarray        # years 0..T-2, marginal-utility units at t+1
    hazards: np.ndarray        # hazards[t] = P(arrival in year t | survival), t=1..T
    branches: dict             # arrival year -> PostTaiPath
    converged: bool
    iterations: int
    max_residual: float
    params: ModelParams
    settings: SolverSettings


# ---------------------------------------------------------------------------
# Generic damped Newton on a tridiagonal stacked-residual system


def _newton_tridiag(fun, x0, tol, max_iter, damping):
    """Solve fun(x) = 0 where row i of the Jacobian touches only x[i-1..i+1].

    The Jacobian is built from three colored finite-difference evaluations.
    Returns (x, max_residual, converged).
    """
    x = np.asarray(x0, dtype=float).copy()
    n = len(x)
    res = fun(x)
    norm = float(np.max(np.abs(res)))
    for _ in range(max_iter):
        if norm < tol:
            return x, norm, True
        sub = np.zeros(n)
        diag = np.zeros(n)
        sup = np.zeros(n)
        for color in range(3):
            idx = np.arange(color, n, 3)
            h = 1e-7 * np.maximum(1.0, np.abs(x[idx]))
            xp = x.copy()
            xp[idx] += h
            dres = (fun(xp) - res)
            for j, hj in zip(idx, h):
                diag[j] += dres[j] / hj
                if j > 0:
                    sup[j] += dres[j - 1] / hj      # d res[j-1] / d x[j]
                if j < n - 1:
                    sub[j] += dres[j + 1] / hj      # d res[j+1] / d x[j]
        ab = np.zeros((3, n))
        ab[0, 1:] = sup[1:]
        ab[1, :] = diag
        ab[2, :-1] = sub[:-1]
        try:
            dx = solve_banded((1, 1), ab, -res)
        except np.linalg.LinAlgError:
            return x, norm, False
        step = damping
        accepted = False
        for _ in range(50):
            x_trial = x + step * dx
            res_trial = fun(x_trial)
            norm_trial = float(np.max(np.abs(res_trial)))
            if norm_trial < norm or norm_trial < tol:
                x, res, norm = x_trial, res_trial, norm_trial
                accepted = True
                break
            step *= 0.5
        if not accepted:
            return x, norm, False
    return x, norm, norm < tol


# ---------------------------------------------------------------------------
# Post-arrival branches


def _mu(c, eta):
    return c ** (-eta)


def _branch_residuals(k_interior, k0, k_end, params: ModelParams):
    """Euler residuals of the deterministic post-arrival path."""
    p = params
    k = np.concatenate(([k0], k_interior, [k_end]))
    if np.any(k <= 0.0):
        viol = np.maximum(0.0, _C_FLOOR - k)
        return _PENALTY * (1.0 + viol[1:-1] + viol[:-2] + viol[2:])
    y = k[:-1] ** p.alpha * p.labor ** (1.0 - p.alpha)
    c = y + (1.0 - p.delta) * k[:-1] - (1.0 + p.g_tai) * k[1:]
    if np.any(c <= _C_FLOOR):
        viol = np.maximum(0.0, _C_FLOOR - c)
        return _PENALTY * (1.0 + viol[:-1] + viol[1:])
    r_next = p.alpha * y[1:] / k[1:-1] - p.delta
    growth_factor = p.beta * (1.0 + p.g_tai) ** (-p.eta)
    return _mu(c[:-1], p.eta) - growth_factor * (1.0 + r_next) * _mu(c[1:], p.eta)


def _premium_rest(k, c, params: ModelParams, ss) -> float:
    """Premium summands at branch offsets >= 1 plus the steady-state tail.

    The sum is over Eq-style indices i >= 2 with weight beta^i * G^((1-eta)(i-1)),
    where offset i-1 indexes the branch arrays.
    """
    p = params
    G = 1.0 + p.g_tai
    q = p.beta * G ** (1.0 - p.eta)
    H = len(c)
    i = np.arange(2, H + 1, dtype=float)
    w = (1.0 - p.alpha) * (k[1:H] ** p.alpha * p.labor ** (1.0 - p.alpha)) / p.labor
    body = float(np.sum(p.beta**i * G ** ((1.0 - p.eta) * (i - 1.0)) * w * _mu(c[1:H], p.eta)))
    tail = ss.w_hat * _mu(ss.c_hat, p.eta) * q ** (H + 1) / ((1.0 - q) * G ** (1.0 - p.eta))
    return body + tail


def solve_post_tai_branch(k0_hat, params: ModelParams, settings: SolverSettings,
                          arrival_year: int = 0, x0=None) -> PostTaiPath:
    """Solve the deterministic post-arrival path from predetermined capital
    k0_hat to the post-arrival steady state."""
    if k0_hat <= 0.0:
        raise ValueError("arrival capital must be positive")
    p = params
    ss = stationary_state(p.g_tai, p)
    H = settings.branch_horizon
    fun = lambda xi: _branch_residuals(xi, k0_hat, ss.k_hat, p)
    default_x0 = ss.k_hat + (k0_hat - ss.k_hat) * 0.7 ** np.arange(1, H)
    # A warm start carried over from a different arrival capital can imply
    # negative consumption; fall back to the default path in that case.
    if x0 is None or np.any(fun(np.asarray(x0)) >= _PENALTY):
        x0 = default_x0
    tol = min(settings.tol, 1e-12)
    x, norm, ok = _newton_tridiag(fun, x0, tol, 200, 1.0)
    if not ok and norm > settings.tol:
        if np.any(_branch_residuals(x, k0_hat, ss.k_hat, p) >= _PENALTY):
            raise InfeasiblePathError(
                f"no positive-consumption branch from k0={k0_hat} over {H} years")
        raise NonConvergenceError(
            f"post-arrival branch failed to converge (residual {norm:.3e})",
            max_residual=norm, where=f"arrival_year={arrival_year}")
    k = np.concatenate(([k0_hat], x, [ss.k_hat]))
    if abs(k[H - 1] - ss.k_hat) > max(settings.tol, 1e-7) * max(1.0, ss.k_hat):
        raise ConfigurationError(
            "branch_horizon too short: path has not settled at the post-arrival "
            f"steady state (gap {abs(k[H-1]-ss.k_hat):.3e})")
    y = k[:-1] ** p.alpha * p.labor ** (1.0 - p.alpha)
    c = y + (1.0 - p.delta) * k[:-1] - (1.0 + p.g_tai) * k[1:]
    w = (1.0 - p.alpha) * y / p.labor
    r = p.alpha * y / k[:-1] - p.delta
    branch = PostTaiPath(arrival_year=arrival_year, k_hat=k, c_hat=c, y_hat=y,
                         w_hat=w, r_k=r, converged=True, max_residual=norm)
    branch.premium_rest = _premium_rest(k, c, p, ss)
    return branch


def strategic_premium(branch: PostTaiPath, k_next_hat, hazard, params: ModelParams) -> float:
    """Marginal strategic value of arrival-year capital, in marginal-utility
    units detrended at the arrival year:

        hazard * (lambda / k_next) * sum_{i>=1} beta^i G^((1-eta)(i-1))
                                               * w_hat[i-1] * c_hat[i-1]^(-eta)

    The offset-0 terms are recomputed from k_next_hat so the expression stays
    consistent while the spine capital moves between branch refreshes.
    """
    p = params
    if hazard == 0.0 or p.lam == 0.0:
        return 0.0
    if k_next_hat <= 0.0:
        raise ValueError("capital choice must be positive")
    if not branch.converged:
        raise ValueError("branch must be converged")
    y0 = k_next_hat ** p.alpha * p.labor ** (1.0 - p.alpha)
    c0 = y0 + (1.0 - p.delta) * k_next_hat - (1.0 + p.g_tai) * branch.k_hat[1]
    if c0 <= 0.0:
        raise ValueError("implied arrival-year consumption non-positive")
    w0 = (1.0 - p.alpha) * y0 / p.labor
    total = p.beta * w0 * _mu(c0, p.eta) + branch.premium_rest
    return hazard * (p.lam / k_next_hat) * total


# ---------------------------------------------------------------------------
# The pre-arrival spine


def _spine_residuals(k_interior, k0, k_end, hazards, kb1, prem_rest, params: ModelParams,
                     use_premium=True):
    """Stacked pre-arrival Euler residuals given frozen branch data.

    ``hazards[t]`` is the per-period hazard of arrival in year t; ``kb1`` and
    ``prem_rest`` hold, per year, the frozen branch's offset-1 capital and
    premium remainder (NaN where the hazard is zero).
    """
    p = params
    k = np.concatenate(([k0], k_interior, [k_end]))
    T = len(k) - 1
    if np.any(k <= 0.0):
        viol = np.maximum(0.0, _C_FLOOR - k)
        return _PENALTY * (1.0 + viol[:-2] + viol[1:-1] + viol[2:])
    y = k[:-1] ** p.alpha * p.labor ** (1.0 - p.alpha)
    c = y + (1.0 - p.delta) * k[:-1] - (1.0 + p.g_sq) * k[1:]

    h = hazards[1:T]                      # hazard of arrival in years 1..T-1
    active = h > 0.0
    cT = np.zeros(T - 1)
    if np.any(active):
        idx = np.where(active)[0]
        ka = k[1:T][idx]
        ya = y[1:T][idx]
        cT[idx] = ya + (1.0 - p.delta) * ka - (1.0 + p.g_tai) * kb1[1:T][idx]

    bad_c = c <= _C_FLOOR
    bad_cT = active & (cT <= _C_FLOOR)
    if np.any(bad_c) or np.any(bad_cT):
        viol_c = np.maximum(0.0, _C_FLOOR - c)
        violT = np.where(active, np.maximum(0.0, _C_FLOOR - cT), 0.0)
        return _PENALTY * (1.0 + viol_c[:-1] + viol_c[1:] + violT)

    mu_sq = _mu(c, p.eta)
    emu = (1.0 - h) * mu_sq[1:]
    prem = np.zeros(T - 1)
    if np.any(active):
        idx = np.where(active)[0]
        muT = _mu(cT[idx], p.eta)
        emu[idx] += h[idx] * muT
        if use_premium and p.lam != 0.0:
            ka = k[1:T][idx]
            w0 = (1.0 - p.alpha) * y[1:T][idx] / p.labor
            total = p.beta * w0 * muT + prem_rest[1:T][idx]
            prem[idx] = h[idx] * (p.lam / ka) * total

    r_next = p.alpha * y[1:] / k[1:-1] - p.delta
    gf = (1.0 + p.g_sq) ** (-p.eta)
    return mu_sq[:-1] - p.beta * gf * (1.0 + r_next) * emu - gf * prem


def pre_tai_euler_residual(t, k_path, branches, beliefs: ArrivalDistribution,
                           params: ModelParams, use_premium=True) -> float:
    """Euler residual at spine year t for a candidate capital sequence."""
    k = np.asarray(k_path, dtype=float)
    T = len(k) - 1
    if not 0 <= t <= T - 2:
        raise ValueError("t out of range for the given capital path")
    hazards = np.concatenate(([0.0], beliefs.hazards(T)))
    kb1 = np.full(T, np.nan)
    prem_rest = np.full(T, np.nan)
    for year, br in branches.items():
        if 1 <= year <= T - 1:
            kb1[year] = br.k_hat[1]
            prem_rest[year] = br.premium_rest
    res = _spine_residuals(k[1:-1], k[0], k[-1], hazards, kb1, prem_rest,
                           params, use_premium=use_premium)
    return float(res[t])


def _resolve_threads(threads=None) -> int:
    if threads is None:
        threads = int(os.environ.get("TAI_SOLVER_THREADS", "0") or 0)
    if threads <= 0:
        threads = min(8, os.cpu_count() or 1)
    return threads


def solve_spine(params: ModelParams, beliefs: ArrivalDistribution,
                settings: SolverSettings | None = None, use_premium=True,
                threads=None, branch_cache=None) -> SpinePath:
    """Solve the no-arrival equilibrium path.

    Alternates (i) solving every post-arrival branch at its current
    arrival-year capital with (ii) damped Newton on the stacked pre-arrival
    Euler system holding branches frozen, until the spine stops moving.
    """
    settings = settings or SolverSettings()
    p = params
    T = settings.terminal_year
    S = beliefs.horizon
    if T < S:
        raise ConfigurationError(f"terminal_year ({T}) must be >= timeline horizon ({S})")
    ss = stationary_state(p.g_sq, p)
    hazards = np.concatenate(([0.0], beliefs.hazards(T)))
    arrival_years = [t for t in range(1, T) if hazards[t] > 0.0]

    k = np.full(T + 1, ss.k_hat)
    branches: dict = dict(branch_cache) if branch_cache else {}
    n_threads = _resolve_threads(threads)
    refresh_tol = settings.tol / 10.0

    def refresh_branches():
        stale = [t for t in arrival_years
                 if t not in branches or abs(k[t] - branches[t].k_hat[0]) > refresh_tol]

        def solve_one(t):
            warm = branches[t].k_hat[1:-1] if t in branches else None
            return t, solve_post_tai_branch(k[t], p, settings, arrival_year=t, x0=warm)

        if len(stale) > 1 and n_threads > 1:
            with ThreadPoolExecutor(max_workers=n_threads) as pool:
                results = list(pool.map(solve_one, stale))
        else:
            results = [solve_one(t) for t in stale]
        for t, br in results:
            branches[t] = br
        return len(stale)

    kb1 = np.full(T, np.nan)
    prem_rest = np.full(T, np.nan)

    def sync_branch_arrays():
        for t in arrival_years:
            kb1[t] = branches[t].k_hat[1]
            prem_rest[t] = branches[t].premium_rest

    fun = lambda xi: _spine_residuals(xi, ss.k_hat, ss.k_hat, hazards, kb1,
                                      prem_rest, p, use_premium=use_premium)
    inner_tol = min(settings.tol, 1e-12)
    norm = np.inf
    converged = False
    outer = 0
    for outer in range(1, settings.max_iter + 1):
        n_stale = refresh_branches()
        sync_branch_arrays()
        k_prev = k.copy()
        x, norm, ok = _newton_tridiag(fun, k[1:-1], inner_tol, 60, settings.damping)
        moved = float(np.max(np.abs(x - k[1:-1])))
        k[1:-1] = x
        if not ok and norm > settings.tol:
            res = fun(x)
            if np.any(res >= _PENALTY):
                raise InfeasiblePathError("no positive-consumption spine at the current iterate")
            if n_stale == 0 and moved < settings.tol:
                break           # stalled with up-to-date branches: report failure
            continue
        drift = max((abs(k[t] - branches[t].k_hat[0]) for t in arrival_years), default=0.0)
        if np.max(np.abs(k - k_prev)) < settings.tol and drift <= refresh_tol:
            converged = True
            break
    if not converged:
        res = fun(k[1:-1])
        worst = int(np.argmax(np.abs(res)))
        raise NonConvergenceError(
            f"spine failed to converge in {settings.max_iter} outer iterations "
            f"(residual {norm:.3e} at year {worst})",
            max_residual=norm, where=f"year={worst}")

    y = k[:-1] ** p.alpha * p.labor ** (1.0 - p.alpha)
    c = y + (1.0 - p.delta) * k[:-1] - (1.0 + p.g_sq) * k[1:]
    w = (1.0 - p.alpha) * y / p.labor
    r = p.alpha * y / k[:-1] - p.delta
    premium = np.zeros(T - 1)
    if use_premium and p.lam != 0.0:
        for t in arrival_years:
            if t <= T - 1:
                premium[t - 1] = strategic_premium(branches[t], k[t], hazards[t], p)
    return SpinePath(k_hat=k, c_hat=c, y_hat=y, w_hat=w, r_k=r, premium=premium,
                     hazards=hazards, branches=branches, converged=True,
                     iterations=outer, max_residual=norm, params=p, settings=settings)
