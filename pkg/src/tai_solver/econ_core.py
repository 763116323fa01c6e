"""Model primitives: preferences, technology, factor prices, stationary states,
and the wealth-based AI-labor allocation rule.

All quantities are detrended (divided by TFP) unless stated otherwise. The
detrended capital transition is (1+g) * k_next = (1-delta) * k + y - c.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ConfigurationError


@dataclass(frozen=True)
class ModelParams:
    """Structural parameters of preferences and technology.

    ``lam`` is the wealth-sensitivity exponent of the AI-labor allocation
    rule (``lambda`` in config files; that name is reserved in Python).
    """

    beta: float = 0.99
    eta: float = 1.0
    alpha: float = 0.36
    delta: float = 0.025
    g_sq: float = 0.018
    g_tai: float = 0.30
    lam: float = 1.0
    labor: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ConfigurationError(f"beta must lie in (0,1), got {self.beta}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f"alpha must lie in (0,1), got {self.alpha}")
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigurationError(f"delta must lie in [0,1], got {self.delta}")
        if self.eta < 0.0:
            raise ConfigurationError(f"eta must be >= 0, got {self.eta}")
        if self.labor <= 0.0:
            raise ConfigurationError(f"labor must be > 0, got {self.labor}")
        for name, g in (("g_sq", self.g_sq), ("g_tai", self.g_tai)):
            if self.beta * (1.0 + g) ** (1.0 - self.eta) >= 1.0:
                raise ConfigurationError(
                    "convergence condition beta*(1+g)^(1-eta) < 1 violated for "
                    f"{name}={g} (beta={self.beta}, eta={self.eta})"
                )


@dataclass(frozen=True)
class SteadyState:
    """Detrended stationary equilibrium for a fixed TFP growth rate."""

    k_hat: float
    c_hat: float
    y_hat: float
    w_hat: float
    r_k: float
    r_gross: float
    g: float


def utility(c, eta):
    """CRRA felicity; exact log at eta = 1 (the removable singularity)."""
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0.0):
        raise ValueError("consumption must be positive")
    if eta == 1.0:
        out = np.log(c)
    else:
        out = (c ** (1.0 - eta) - 1.0) / (1.0 - eta)
    return out if out.ndim else float(out)


def marginal_utility(c, eta):
    """u'(c) = c^(-eta)."""
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0.0):
        raise ValueError("consumption must be positive")
    out = c ** (-eta)
    return out if out.ndim else float(out)


def output(k, a, l, alpha):
    """Cobb-Douglas production k^alpha * (a*l)^(1-alpha)."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0.0):
        raise ValueError("capital must be nonnegative")
    if np.any(np.asarray(a) <= 0.0) or np.any(np.asarray(l) <= 0.0):
        raise ValueError("TFP and labor must be positive")
    out = k**alpha * (a * l) ** (1.0 - alpha)
    return out if out.ndim else float(out)


def rental_rate(k, a, l, params: ModelParams):
    """Net capital rental rate alpha*(a*l/k)^(1-alpha) - delta."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0.0):
        raise ValueError("capital must be positive (marginal product diverges at 0)")
    out = params.alpha * (a * l / k) ** (1.0 - params.alpha) - params.delta
    return out if out.ndim else float(out)


def wage(r_k, a, params: ModelParams):
    """Wage per labor unit implied by the firm's FOCs at rental rate r_k."""
    r_k = np.asarray(r_k, dtype=float)
    if np.any(r_k + params.delta <= 0.0):
        raise ValueError("r_k + delta must be positive")
    exponent = params.alpha / (1.0 - params.alpha)
    out = (1.0 - params.alpha) * a * (params.alpha / (r_k + params.delta)) ** exponent
    return out if out.ndim else float(out)


def stationary_gross_rate(g, params: ModelParams):
    """Gross stationary interest factor (1+g)^eta / beta."""
    return (1.0 + g) ** params.eta / params.beta


def stationary_state(g, params: ModelParams) -> SteadyState:
    """Detrended steady state for growth rate g.

    Inverts the rental-rate condition in closed form: the net rate equals the
    stationary gross factor minus one.
    """
    r_gross = stationary_gross_rate(g, params)
    r_k = r_gross - 1.0
    if r_k + params.delta <= 0.0:
        raise ConfigurationError("stationary rental rate plus depreciation non-positive")
    k_hat = (params.alpha / (r_k + params.delta)) ** (1.0 / (1.0 - params.alpha)) * params.labor
    y_hat = output(k_hat, 1.0, params.labor, params.alpha)
    c_hat = y_hat + (1.0 - params.delta) * k_hat - (1.0 + g) * k_hat
    if c_hat <= 0.0:
        raise ConfigurationError(
            f"stationary consumption non-positive (c_hat={c_hat}) for g={g}"
        )
    w_hat = (1.0 - params.alpha) * y_hat / params.labor
    return SteadyState(k_hat=k_hat, c_hat=c_hat, y_hat=y_hat, w_hat=w_hat,
                       r_k=r_k, r_gross=r_gross, g=g)


def labor_share(k_own, k_agg, lam, population: Sequence[tuple] | None = None):
    """AI-labor share of a household with capital k_own.

    ``population`` is an optional finite mixture of (mass, capital) atoms
    standing in for the continuum; when omitted the population is symmetric
    at k_agg and the normalizing integral is 1.
    """
    if k_agg <= 0.0:
        raise ValueError("aggregate capital must be positive")
    if k_own < 0.0:
        raise ValueError("own capital must be nonnegative")
    if k_own == 0.0:
        if lam > 0.0:
            return 0.0
        if lam < 0.0:
            raise ValueError("share diverges at zero capital for lambda < 0")
    if population is None:
        denom = 1.0
    else:
        denom = sum(m * (ki / k_agg) ** lam for m, ki in population)
    return (k_own / k_agg) ** lam / denom


def labor_share_gradient(k_agg, lam):
    """d(share)/d(own capital) at the symmetric point, aggregate held fixed."""
    if k_agg <= 0.0:
        raise ValueError("aggregate capital must be positive")
    return lam / k_agg


def savings_rate(y, c):
    """(y - c) / y; negative values indicate capital depletion."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0.0):
        raise ValueError("output must be positive")
    out = (y - np.asarray(c, dtype=float)) / y
    return out if out.ndim else float(out)
