"""Closed-form equilibria for constant benefit Q(alpha) = q under uniform
valuations on [0, 1].

The price axis is partitioned by the threshold sequences

    gamma(k) = ((K - k) B_k + B_{<=k}) / (q N)        k = 0..K
    xi(k)    = B_k / N                                 k = 1..K (+inf sentinel)
    p_star(k) = B_{<=k} / (N (q - (K - k)))            when q > K - k

and instances fall into one of three regimes by the size of q relative to the
buyer side:

* high (q >= K): full participation is the unique equilibrium at every price.
* moderate (K > q >= B_{<=K} / B_K): a unique equilibrium per price — partial
  below the full-participation price p_threshold = p_star(k_bar), full at or
  above it.
* low (q < B_{<=K} / B_K): partial below gamma(K), a continuum
  [q B_K / B_{<=K}, 1] exactly at gamma(K), and full above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    EquilibriumInterval,
    EquilibriumPoint,
    EquilibriumSet,
    MarketConfig,
    buyer_demand,
    cumulative_budget,
)

__all__ = [
    "ConstantThresholds",
    "thresholds",
    "classify_constant",
    "find_k_bar",
    "solve_constant",
    "exogenous_constant",
]

# Relative tolerance for detecting the measure-zero continuum price gamma(K).
_GAMMA_K_REL_TOL = 1e-9


@dataclass(frozen=True)
class ConstantThresholds:
    """Price thresholds of one constant-benefit instance.

    ``gamma[k]`` is gamma(k) for k = 0..K; ``xi[k - 1]`` is xi(k) for
    k = 1..K+1 with xi(K+1) = +inf; ``p_star`` maps k to p_star(k) for the k
    where it is defined (q > K - k). ``k_bar`` is the buyer threshold at
    which full participation first becomes an equilibrium (None in the high
    regime, where it holds at every price); ``p_threshold`` is the lowest
    price with a full-participation equilibrium (0 in the high regime).
    """

    gamma: tuple[float, ...]
    xi: tuple[float, ...]
    p_star: dict[int, float]
    k_bar: int | None
    p_threshold: float


def classify_constant(config: MarketConfig, q: float) -> str:
    """Regime of a constant-benefit instance: 'high' | 'moderate' | 'low'."""
    if not q > 0:
        raise ValueError(f"constant benefit must be positive, got {q}")
    k = config.n_buyers
    if q >= k:
        return "high"
    if q >= cumulative_budget(config, k) / config.budgets[-1]:
        return "moderate"
    return "low"


def find_k_bar(config: MarketConfig, q: float) -> int:
    """Smallest buyer threshold admitting full participation at some price.

    k_bar is the unique k with B_{<=k} > (q - (K - k)) B_k and
    B_{<=k} <= (q - (K - k)) B_{k+1} (sentinel B_{K+1} = +inf). In the low
    regime this is K. Undefined in the high regime, where full participation
    holds at every price.
    """
    regime = classify_constant(config, q)
    if regime == "high":
        raise ValueError("k_bar is undefined when q >= K (full at every price)")
    kk = config.n_buyers
    for k in range(1, kk + 1):
        coef = q - (kk - k)
        csum = cumulative_budget(config, k)
        cond_partial = csum > coef * config.budget(k)
        upper = config.budget(k + 1)
        cond_full = math.isinf(upper) or csum <= coef * upper
        if cond_partial and cond_full:
            return k
    raise ValueError("no buyer threshold satisfies the regime conditions")


def thresholds(config: MarketConfig, q: float) -> ConstantThresholds:
    """All price thresholds (gamma, xi, p_star, k_bar, p_threshold)."""
    if not q > 0:
        raise ValueError(f"constant benefit must be positive, got {q}")
    kk = config.n_buyers
    n = config.user_mass
    gamma = tuple(
        ((kk - k) * config.budget(k) + cumulative_budget(config, k)) / (q * n)
        for k in range(kk + 1)
    )
    xi = tuple(config.budgets[k - 1] / n for k in range(1, kk + 1)) + (math.inf,)
    p_star = {
        k: cumulative_budget(config, k) / (n * (q - (kk - k)))
        for k in range(1, kk + 1)
        if q > kk - k
    }
    regime = classify_constant(config, q)
    if regime == "high":
        k_bar: int | None = None
        p_threshold = 0.0
    else:
        k_bar = find_k_bar(config, q)
        p_threshold = p_star[k_bar] if regime == "moderate" else gamma[kk]
    return ConstantThresholds(
        gamma=gamma, xi=xi, p_star=p_star, k_bar=k_bar, p_threshold=p_threshold
    )


def _full_point(config: MarketConfig) -> EquilibriumPoint:
    allocation = buyer_demand(config, 1.0)
    return EquilibriumPoint(
        alpha=1.0, regime="full", threshold=allocation.threshold, allocation=allocation
    )


def _partial_point(config: MarketConfig, q: float, gamma: tuple[float, ...]) -> EquilibriumPoint:
    """Partial equilibrium on the price segment (gamma(k), gamma(k+1)].

    Binary search over the nondecreasing gamma sequence; ties at gamma(k+1)
    assign to segment k, and equal consecutive budgets collapse segments to
    empty price ranges that are skipped automatically.
    """
    kk = config.n_buyers
    k = int(np.searchsorted(np.asarray(gamma), config.price, side="left")) - 1
    if not 0 <= k < kk:
        raise ValueError(
            f"price {config.price} falls outside the partial-participation range"
        )
    csum = cumulative_budget(config, k)
    alpha = (q - csum / (config.price * config.user_mass)) / (kk - k)
    allocation = buyer_demand(config, alpha)
    return EquilibriumPoint(
        alpha=alpha,
        regime="partial",
        threshold=allocation.threshold,
        allocation=allocation,
    )


def solve_constant(config: MarketConfig, q: float) -> EquilibriumSet:
    """Every nontrivial equilibrium of a constant-benefit instance at its price."""
    regime = classify_constant(config, q)
    if regime == "high":
        return EquilibriumSet.build(points=(_full_point(config),), source="analytic")
    th = thresholds(config, q)
    price = config.price
    if regime == "moderate":
        if price >= th.p_threshold:
            return EquilibriumSet.build(points=(_full_point(config),), source="analytic")
        return EquilibriumSet.build(
            points=(_partial_point(config, q, th.gamma),), source="analytic"
        )
    # low regime: continuum exactly at gamma(K)
    gamma_k = th.gamma[config.n_buyers]
    if math.isclose(price, gamma_k, rel_tol=_GAMMA_K_REL_TOL):
        lo = q * config.budgets[-1] / cumulative_budget(config, config.n_buyers)
        interval = EquilibriumInterval(lo=lo, hi=1.0, regime="mixed")
        return EquilibriumSet.build(intervals=(interval,), source="analytic")
    if price > gamma_k:
        return EquilibriumSet.build(points=(_full_point(config),), source="analytic")
    return EquilibriumSet.build(
        points=(_partial_point(config, q, th.gamma),), source="analytic"
    )


def exogenous_constant(q: float, v: float) -> float:
    """Participation under exogenous (purchase-independent) privacy costs.

    With costs fixed at the user's valuation, the equilibrium rate is
    F(q) = min(1, q / v) for valuations uniform on [0, v] — independent of
    the price by construction.
    """
    if not v > 0:
        raise ValueError(f"valuation scale must be positive, got {v}")
    if q < 0:
        raise ValueError(f"constant benefit must be nonnegative, got {q}")
    return min(1.0, q / v)
