"""Closed-form equilibria for linear benefit Q(alpha) = c * alpha * N under
uniform valuations on [0, 1].

With linear benefit the fixed point is governed by cn = c * N against the
number of buyers K:

* high (cn > K): full participation is the unique equilibrium at every price.
* special (cn = K): every alpha in (0, min(1, B_1 / (P N))] is an equilibrium
  (the residual vanishes identically while no buyer is budget-bound), plus
  the full point alpha = 1 — at every price.
* low (cn < K): no nontrivial equilibrium below the price threshold; at and
  above it full participation, and strictly above it an additional partial
  branch alpha = A / P that decreases in price.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    EquilibriumInterval,
    EquilibriumPoint,
    EquilibriumSet,
    MarketConfig,
    buyer_demand,
    cumulative_budget,
)

__all__ = [
    "LinearThresholds",
    "classify_linear",
    "find_k_hat",
    "find_k_tilde",
    "linear_thresholds",
    "solve_linear",
    "exogenous_linear",
]

# Relative tolerance for detecting the structural boundary cn = K; matches
# within tolerance are solved as 'special' and flagged in the result notes.
_CN_REL_TOL = 1e-12


@dataclass(frozen=True)
class LinearThresholds:
    """Thresholds of one linear-benefit instance.

    ``cn`` is c * N. ``k_hat`` (with its coefficient ``a``, so the partial
    branch is alpha = a / P) exists when some buyer threshold supports a
    partial equilibrium; otherwise ``k_tilde`` is the fallback threshold at
    which full participation starts. ``p_threshold`` is the lowest price with
    any nontrivial equilibrium (0 in the high and special regimes).
    """

    cn: float
    k_hat: int | None
    a: float | None
    k_tilde: int | None
    p_threshold: float


def classify_linear(config: MarketConfig, c: float) -> str:
    """Regime of a linear-benefit instance: 'high' | 'special' | 'low'."""
    if not c > 0:
        raise ValueError(f"linear benefit coefficient must be positive, got {c}")
    cn = c * config.user_mass
    k = config.n_buyers
    if math.isclose(cn, k, rel_tol=_CN_REL_TOL):
        return "special"
    return "high" if cn > k else "low"


def find_k_hat(config: MarketConfig, c: float) -> tuple[int, float] | None:
    """Buyer threshold supporting a partial equilibrium, with its coefficient.

    Scans k over (K - cn, K] for the unique k with
    B_k < B_{<=k} / (cn - (K - k)) <= B_{k+1} (sentinel B_{K+1} = +inf) and
    returns (k_hat, A) where A = B_{<=k_hat} / (c N^2 - N (K - k_hat)), the
    coefficient of the partial branch alpha = A / P. Candidates at or below
    K - cn are excluded before any division, keeping the denominator positive.
    Returns None when no candidate qualifies.
    """
    if classify_linear(config, c) != "low":
        raise ValueError("partial-branch threshold is defined only when c*N < K")
    cn = c * config.user_mass
    kk = config.n_buyers
    for k in range(1, kk + 1):
        denom = cn - (kk - k)
        if denom <= 0:
            continue
        ratio = cumulative_budget(config, k) / denom
        upper = config.budget(k + 1)
        if config.budget(k) < ratio and (math.isinf(upper) or ratio <= upper):
            return k, ratio / config.user_mass
    return None


def find_k_tilde(config: MarketConfig, c: float) -> int:
    """Fallback buyer threshold when no partial branch exists.

    The smallest k > K - cn with B_{<=k} / (cn - (K - k)) <= B_{k+1}; full
    participation is then the unique equilibrium for P >= B_{k_tilde} / N.
    k = K always qualifies via the +inf sentinel.
    """
    if classify_linear(config, c) != "low":
        raise ValueError("fallback threshold is defined only when c*N < K")
    cn = c * config.user_mass
    kk = config.n_buyers
    for k in range(1, kk + 1):
        denom = cn - (kk - k)
        if denom <= 0:
            continue
        upper = config.budget(k + 1)
        if math.isinf(upper) or cumulative_budget(config, k) <= denom * upper:
            return k
    raise ValueError("no buyer threshold satisfies the fallback condition")


def linear_thresholds(config: MarketConfig, c: float) -> LinearThresholds:
    """Regime thresholds of a linear-benefit instance."""
    regime = classify_linear(config, c)
    cn = c * config.user_mass
    if regime != "low":
        return LinearThresholds(
            cn=cn, k_hat=None, a=None, k_tilde=None, p_threshold=0.0
        )
    hit = find_k_hat(config, c)
    if hit is not None:
        k_hat, a = hit
        return LinearThresholds(cn=cn, k_hat=k_hat, a=a, k_tilde=None, p_threshold=a)
    k_tilde = find_k_tilde(config, c)
    return LinearThresholds(
        cn=cn,
        k_hat=None,
        a=None,
        k_tilde=k_tilde,
        p_threshold=config.budget(k_tilde) / config.user_mass,
    )


def _full_point(config: MarketConfig) -> EquilibriumPoint:
    allocation = buyer_demand(config, 1.0)
    return EquilibriumPoint(
        alpha=1.0, regime="full", threshold=allocation.threshold, allocation=allocation
    )


def solve_linear(config: MarketConfig, c: float) -> EquilibriumSet:
    """Every nontrivial equilibrium of a linear-benefit instance at its price."""
    regime = classify_linear(config, c)
    cn = c * config.user_mass
    if regime == "high":
        return EquilibriumSet.build(points=(_full_point(config),), source="analytic")
    if regime == "special":
        notes = ()
        if cn != config.n_buyers:
            notes = ("c*N matched K within relative tolerance 1e-12; solved as the "
                     "continuum boundary case",)
        cap = config.budgets[0] / (config.price * config.user_mass)
        interval = EquilibriumInterval(
            lo=0.0,
            hi=min(1.0, cap),
            regime="mixed",
            open_lo=True,  # alpha = 0 is the excluded trivial equilibrium
            open_hi=cap >= 1.0,
        )
        return EquilibriumSet.build(
            points=(_full_point(config),),
            intervals=(interval,),
            source="analytic",
            notes=notes,
        )
    # low regime
    th = linear_thresholds(config, c)
    if config.price < th.p_threshold:
        return EquilibriumSet.build(source="analytic")
    points = [_full_point(config)]
    if th.k_hat is not None and config.price > th.a:
        alpha = th.a / config.price
        allocation = buyer_demand(config, alpha)
        points.append(
            EquilibriumPoint(
                alpha=alpha,
                regime="partial",
                threshold=allocation.threshold,
                allocation=allocation,
            )
        )
    return EquilibriumSet.build(points=tuple(points), source="analytic")


def exogenous_linear(c: float, user_mass: float, v: float) -> EquilibriumSet:
    """Equilibria under exogenous (purchase-independent) privacy costs.

    The fixed point alpha = F(c * alpha * N) with F uniform on [0, v] has a
    knife-edge structure independent of the price: only the corners {0, 1}
    when c*N > v, the whole interval [0, 1] when c*N = v, and only the
    trivial point when c*N < v. The trivial alpha = 0 is reported here (and
    only here) so baseline plots show the complete picture.
    """
    if not (c > 0 and user_mass > 0 and v > 0):
        raise ValueError("c, user_mass, and v must all be positive")
    cn = c * user_mass
    trivial = EquilibriumPoint(alpha=0.0, regime="trivial", threshold=0)
    if math.isclose(cn, v, rel_tol=_CN_REL_TOL):
        interval = EquilibriumInterval(lo=0.0, hi=1.0, regime="mixed")
        return EquilibriumSet.build(intervals=(interval,), source="analytic")
    if cn > v:
        full = EquilibriumPoint(alpha=1.0, regime="full", threshold=0)
        return EquilibriumSet.build(points=(trivial, full), source="analytic")
    return EquilibriumSet.build(points=(trivial,), source="analytic")
