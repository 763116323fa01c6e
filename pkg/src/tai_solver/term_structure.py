"""Reported quantities derived from solved paths: one-year and multi-year
bond rates, rental rates, savings rates, and the strategic wedge.

Rates are reported in level units; the detrended-to-level TFP factors are
applied inside each operation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .econ_core import ModelParams, savings_rate
from .timeline import ArrivalDistribution
from .transition import SpinePath, strategic_premium


@dataclass
class WedgeTerms:
    """The bond-rate, rental-expectation, and premium terms of the one-year
    no-arbitrage identity, all in marginal-utility units detrended at t+1."""

    bond: float
    rental: float
    premium: float
    wedge_rate: float

    @property
    def residual(self) -> float:
        return self.bond - self.rental - self.premium


@dataclass
class RateTable:
    """Per-year reporting series, conditional on no arrival through each year."""

    year: np.ndarray
    rate_1y: np.ndarray
    rate_30y: np.ndarray
    rental: np.ndarray
    savings: np.ndarray
    wedge: np.ndarray
    hazard: np.ndarray


def _mu(c, eta):
    return c ** (-eta)


def _expected_mu_next(t, spine: SpinePath, beliefs: ArrivalDistribution):
    """E_t[u'(c_{t+1})] in units detrended at t+1, over arrival vs survival."""
    p = spine.params
    h = beliefs.hazard(t + 1)
    emu = (1.0 - h) * _mu(spine.c_hat[t + 1], p.eta)
    if h > 0.0:
        emu += h * _mu(spine.branches[t + 1].c_hat[0], p.eta)
    return emu, h


def one_year_rate(t, spine: SpinePath, beliefs: ArrivalDistribution,
                  params: ModelParams) -> float:
    """Annual bond rate at year t from the one-period Euler equation."""
    if not 0 <= t <= len(spine.c_hat) - 2:
        raise ValueError(f"year {t} outside the solved horizon")
    emu, _ = _expected_mu_next(t, spine, beliefs)
    gross = _mu(spine.c_hat[t], params.eta) * (1.0 + params.g_sq) ** params.eta / (params.beta * emu)
    return gross - 1.0


def horizon_rate(t, h, spine: SpinePath, beliefs: ArrivalDistribution,
                 params: ModelParams) -> float:
    """Annualized h-year zero-coupon rate at year t.

    The expectation runs over arrival in each of years t+1..t+h (consumption
    read from the matching branch at offset t+h minus the arrival year) plus
    the no-arrival spine, weighted by beliefs conditioned on survival to t.
    """
    p = params
    if h < 1:
        raise ValueError("horizon must be at least one year")
    if not 0 <= t or t + h > len(spine.c_hat) - 1:
        raise ValueError(f"year {t} plus horizon {h} outside the solved horizon")
    probs = spine_weight = None
    surv = beliefs.survival_before(t + 1)
    S = beliefs.horizon
    weights = np.zeros(h)
    for s in range(1, h + 1):
        year = t + s
        if year <= S:
            weights[s - 1] = beliefs.annual_probs[year - 1] / surv
    spine_weight = 1.0 - weights.sum()

    g1 = 1.0 + p.g_sq
    g2 = 1.0 + p.g_tai
    emu = spine_weight * (g1**h) ** (-p.eta) * _mu(spine.c_hat[t + h], p.eta)
    for s in range(1, h + 1):
        if weights[s - 1] == 0.0:
            continue
        branch = spine.branches[t + s]
        tfp_factor = g1**s * g2 ** (h - s)
        emu += weights[s - 1] * tfp_factor ** (-p.eta) * _mu(branch.c_hat[h - s], p.eta)
    gross_h = _mu(spine.c_hat[t], p.eta) / (p.beta**h * emu)
    return gross_h ** (1.0 / h) - 1.0


def wedge_decomposition(t, spine: SpinePath, beliefs: ArrivalDistribution,
                        params: ModelParams) -> WedgeTerms:
    """Split the one-year no-arbitrage condition into its bond, rental, and
    strategic-premium terms; the identity residual vanishes on solved paths."""
    p = params
    emu, h = _expected_mu_next(t, spine, beliefs)
    r_b = one_year_rate(t, spine, beliefs, p)
    r_k = spine.r_k[t + 1]
    if h > 0.0 and p.lam != 0.0:
        prem = strategic_premium(spine.branches[t + 1], spine.k_hat[t + 1], h, p) / p.beta
    else:
        prem = 0.0
    return WedgeTerms(bond=r_b * emu, rental=r_k * emu, premium=prem,
                      wedge_rate=prem / emu)


def build_rate_table(spine: SpinePath, beliefs: ArrivalDistribution,
                     params: ModelParams, horizon: int = 30,
                     bond_horizon: int = 30) -> RateTable:
    """Populate the reporting series for years 1..horizon."""
    years = np.arange(1, horizon + 1)
    r1 = np.array([one_year_rate(t, spine, beliefs, params) for t in years])
    r30 = np.array([horizon_rate(t, bond_horizon, spine, beliefs, params) for t in years])
    rental = spine.r_k[1:horizon + 1].copy()
    sav = savings_rate(spine.y_hat[1:horizon + 1], spine.c_hat[1:horizon + 1])
    wedge = np.array([wedge_decomposition(t, spine, beliefs, params).wedge_rate
                      for t in years])
    hazard = np.array([beliefs.hazard(int(t)) for t in years])
    return RateTable(year=years, rate_1y=r1, rate_30y=r30, rental=rental,
                     savings=np.asarray(sav), wedge=wedge, hazard=hazard)
