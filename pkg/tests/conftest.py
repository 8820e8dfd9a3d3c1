"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from privmarket import (
    ConstantBenefit,
    EquilibriumSet,
    LinearBenefit,
    MarketConfig,
    UniformValuations,
    residual,
)
from privmarket.cli import set_distance

UNIFORM = UniformValuations()


def max_abs_residual(config: MarketConfig, benefit, eqs: EquilibriumSet, dist=UNIFORM):
    """Largest |residual| over all points and 1000-point interval subgrids."""
    worst = 0.0
    for p in eqs.points:
        worst = max(worst, abs(residual(config, benefit, dist, p.alpha)))
    for iv in eqs.intervals:
        lo = iv.lo if not iv.open_lo else iv.lo + (iv.hi - iv.lo) / 1000.0
        for a in np.linspace(max(lo, 1e-9), iv.hi, 1000):
            worst = max(worst, abs(residual(config, benefit, dist, float(a))))
    return worst


def random_budgets(rng: np.random.Generator, k: int, scale: float = 1.0):
    return tuple(sorted(float(b) for b in rng.uniform(0.2, 3.0, size=k) * scale))


def random_constant_instance(rng: np.random.Generator, regime: str):
    """Market + q targeted at one constant-benefit regime."""
    k = int(rng.integers(1, 6))
    n = float(rng.choice([1.0, 100.0]))
    budgets = random_budgets(rng, k, scale=n)
    ratio = sum(budgets) / budgets[-1]  # B_{<=K} / B_K, in (1, K] (=1 iff K=1)
    if regime == "high":
        q = k * float(rng.uniform(1.0, 2.0))
    elif regime == "moderate":
        if ratio >= k - 1e-9:
            budgets = tuple(b * float(f) for b, f in zip(budgets, sorted(rng.uniform(0.3, 1.0, size=k))))
            budgets = tuple(sorted(budgets))
            ratio = sum(budgets) / budgets[-1]
        if ratio >= k:  # K == 1: moderate range is empty
            return None
        q = float(rng.uniform(ratio, k))
    else:  # low: keep q well above K * tolerance so equilibria are nontrivial
        if k == 1:
            return None  # ratio == 1 leaves no low range
        q = float(rng.uniform(0.5, 0.95)) * ratio
    return MarketConfig(user_mass=n, budgets=budgets, price=1.0), q


def random_linear_instance(rng: np.random.Generator, regime: str):
    """Market + c targeted at one linear-benefit regime."""
    k = int(rng.integers(1, 6))
    n = float(rng.choice([1.0, 100.0]))
    budgets = random_budgets(rng, k, scale=n)
    if regime == "high":
        c = float(rng.uniform(1.05, 3.0)) * k / n
    elif regime == "special":
        c = k / n
    else:
        c = float(rng.uniform(0.2, 0.95)) * k / n
    return MarketConfig(user_mass=n, budgets=budgets, price=1.0), c


def assert_sets_close(analytic, numeric, tol=2e-3):
    d = set_distance(analytic, numeric, clip=tol)
    assert d <= tol, f"set distance {d} exceeds {tol}"


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
