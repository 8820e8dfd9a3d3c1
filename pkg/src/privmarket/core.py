"""Model primitives for a two-sided data marketplace with endogenous privacy costs.

A platform sells participating users' data to K budget-constrained buyers at a
posted price P. A user with privacy valuation v joins when her participation
benefit Q(alpha) outweighs the expected privacy cost v * (expected number of
buyers holding her data). The participation rate alpha is an equilibrium
exactly when the single-variable residual

    residual(alpha) = alpha - F(threshold_valuation(alpha))

vanishes, where F is the CDF of privacy valuations.

All types are immutable and all operations are pure functions; everything here
is safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MarketConfig",
    "BenefitFunction",
    "ConstantBenefit",
    "LinearBenefit",
    "PowerBenefit",
    "SShapedBenefit",
    "ValuationDistribution",
    "UniformValuations",
    "PersonalizedValuations",
    "EmpiricalValuations",
    "BuyerAllocation",
    "EquilibriumPoint",
    "EquilibriumInterval",
    "EquilibriumSet",
    "buyer_demand",
    "cumulative_budget",
    "expected_purchases",
    "expected_cost",
    "user_utility",
    "threshold_valuation",
    "residual",
]


@dataclass(frozen=True)
class MarketConfig:
    """Market instance: user mass N, sorted buyer budgets B_1..B_K, price P.

    The virtual sentinel budgets B_0 = 0 and B_{K+1} = +inf are exposed by
    :meth:`budget`; they are never stored and never enter floating-point
    arithmetic (callers branch on them instead of dividing by them).
    """

    user_mass: float
    budgets: tuple[float, ...]
    price: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "budgets", tuple(float(b) for b in self.budgets))
        if not self.budgets:
            raise ValueError("at least one buyer budget is required")
        if not self.user_mass > 0:
            raise ValueError(f"user_mass must be positive, got {self.user_mass}")
        if not self.price > 0:
            raise ValueError(f"price must be positive, got {self.price}")
        if not self.budgets[0] > 0:
            raise ValueError("budgets must be strictly positive")
        if any(not math.isfinite(b) for b in self.budgets):
            raise ValueError("budgets must be finite")
        if any(a > b for a, b in zip(self.budgets, self.budgets[1:])):
            raise ValueError("budgets must be sorted nondecreasing")

    @property
    def n_buyers(self) -> int:
        return len(self.budgets)

    def budget(self, k: int) -> float:
        """Budget B_k for k in {0, ..., K+1}, including the two sentinels."""
        if k == 0:
            return 0.0
        if k == self.n_buyers + 1:
            return math.inf
        if not 1 <= k <= self.n_buyers:
            raise ValueError(f"buyer index {k} out of range 0..{self.n_buyers + 1}")
        return self.budgets[k - 1]

    def caps(self) -> np.ndarray:
        """Per-buyer affordable masses B_k / P, ascending."""
        return np.asarray(self.budgets) / self.price


def cumulative_budget(config: MarketConfig, m: int) -> float:
    """Sum of the m smallest budgets; 0 for m = 0."""
    if not 0 <= m <= config.n_buyers:
        raise ValueError(f"m={m} out of range 0..{config.n_buyers}")
    return float(sum(config.budgets[:m]))


class BenefitFunction:
    """Participation benefit Q(alpha), nonnegative on [0, 1]."""

    def eval(self, alpha: float, user_mass: float) -> float:
        raise NotImplementedError

    def eval_grid(self, alphas: np.ndarray, user_mass: float) -> np.ndarray:
        return np.array([self.eval(a, user_mass) for a in alphas])


@dataclass(frozen=True)
class ConstantBenefit(BenefitFunction):
    """Q(alpha) = q, independent of participation."""

    q: float

    def __post_init__(self) -> None:
        if self.q < 0:
            raise ValueError("constant benefit must be nonnegative")

    def eval(self, alpha: float, user_mass: float) -> float:
        return self.q

    def eval_grid(self, alphas: np.ndarray, user_mass: float) -> np.ndarray:
        return np.full(len(alphas), self.q)


@dataclass(frozen=True)
class LinearBenefit(BenefitFunction):
    """Q(alpha) = c * alpha * N: benefit grows with the participating mass."""

    c: float

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ValueError("linear benefit coefficient must be positive")

    def eval(self, alpha: float, user_mass: float) -> float:
        return self.c * alpha * user_mass

    def eval_grid(self, alphas: np.ndarray, user_mass: float) -> np.ndarray:
        return self.c * user_mass * np.asarray(alphas, dtype=float)


@dataclass(frozen=True)
class PowerBenefit(BenefitFunction):
    """Q(alpha) = c * (alpha * N)^s, diminishing returns for s in (0, 1).

    s = 0 coincides with ConstantBenefit(c) and s = 1 with LinearBenefit(c).
    """

    c: float
    s: float

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ValueError("power benefit coefficient must be positive")
        if not 0.0 <= self.s <= 1.0:
            raise ValueError("power exponent must lie in [0, 1]")

    def eval(self, alpha: float, user_mass: float) -> float:
        return self.c * (alpha * user_mass) ** self.s

    def eval_grid(self, alphas: np.ndarray, user_mass: float) -> np.ndarray:
        return self.c * (np.asarray(alphas, dtype=float) * user_mass) ** self.s


@dataclass(frozen=True)
class SShapedBenefit(BenefitFunction):
    """Q(alpha) = c * I_alpha(a, b) with I the regularized incomplete beta.

    Models an initial increasing marginal benefit up to a critical mass,
    followed by diminishing returns. Q(0) = 0 and Q(1) = c.
    """

    c: float
    a: float
    b: float

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ValueError("s-shaped benefit coefficient must be positive")
        if not (self.a > 0 and self.b > 0):
            raise ValueError("beta shape parameters must be positive")

    def eval(self, alpha: float, user_mass: float) -> float:
        from .special import regularized_incomplete_beta

        return self.c * regularized_incomplete_beta(alpha, self.a, self.b)

    def eval_grid(self, alphas: np.ndarray, user_mass: float) -> np.ndarray:
        from ._kernels import betainc_vec

        return self.c * betainc_vec(np.asarray(alphas, dtype=float), self.a, self.b)


class ValuationDistribution:
    """Distribution of privacy valuations v in [0, 1] (right-continuous CDF)."""

    #: dispatch tag consumed by the grid kernels
    kind: int

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformValuations(ValuationDistribution):
    """v uniform on [0, scale]: cdf(x) = min(1, x / scale) for x >= 0."""

    scale: float = 1.0
    kind = 0

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def cdf(self, x: float) -> float:
        if x < 0:
            return 0.0
        return min(1.0, x / self.scale)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.random(n) * self.scale


# Survey-derived masses of the privacy-attitude bands. The reported band
# fractions total 0.999, so the top band is renormalized to close the CDF
# at exactly 1.
MASS_NO_CONCERN = 0.107
MASS_MEDIUM_CONCERN = 0.537
MASS_HIGH_CONCERN = 1.0 - MASS_NO_CONCERN - MASS_MEDIUM_CONCERN


@dataclass(frozen=True)
class PersonalizedValuations(ValuationDistribution):
    """Three-band privacy-attitude mixture on [0, 1].

    v = 0 with probability 0.107 (no privacy concern), v uniform on (0, v_m]
    with probability 0.537 (medium concern), and v uniform on (v_m, 1] with
    the remaining mass (high concern). The atom at 0 makes the CDF jump from
    0 to 0.107 at x = 0; it is linear on each band above.
    """

    v_m: float
    kind = 1

    def __post_init__(self) -> None:
        if not 0.0 < self.v_m < 1.0:
            raise ValueError("v_m must lie strictly inside (0, 1)")

    def cdf(self, x: float) -> float:
        if x < 0:
            return 0.0
        if x <= self.v_m:
            return MASS_NO_CONCERN + MASS_MEDIUM_CONCERN * x / self.v_m
        return min(1.0, 1.0 - MASS_HIGH_CONCERN * (1.0 - x) / (1.0 - self.v_m))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        band = rng.random(n)
        pos = rng.random(n)
        medium = MASS_NO_CONCERN + MASS_MEDIUM_CONCERN
        return np.where(
            band < MASS_NO_CONCERN,
            0.0,
            np.where(
                band < medium,
                pos * self.v_m,
                self.v_m + pos * (1.0 - self.v_m),
            ),
        )


class EmpiricalValuations(ValuationDistribution):
    """Empirical CDF of a finite valuation sample (kept sorted)."""

    kind = 2

    def __init__(self, samples: np.ndarray) -> None:
        samples = np.asarray(samples, dtype=float)
        if samples.size == 0:
            raise ValueError("empirical distribution needs at least one sample")
        self.samples = np.sort(samples)
        self.samples.flags.writeable = False

    def cdf(self, x: float) -> float:
        return float(np.searchsorted(self.samples, x, side="right")) / self.samples.size

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.integers(0, self.samples.size, size=n)
        return self.samples[idx]


@dataclass(frozen=True)
class BuyerAllocation:
    """Per-buyer purchased masses N_k and the buyer threshold k*.

    Buyers k <= k* exhaust their budget (N_k < alpha*N); buyers k > k* buy
    the full participating mass alpha*N.
    """

    per_buyer: tuple[float, ...]
    threshold: int

    @property
    def total(self) -> float:
        return sum(self.per_buyer)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")


def buyer_demand(config: MarketConfig, alpha: float) -> BuyerAllocation:
    """Each buyer purchases N_k = min(alpha*N, B_k / P)."""
    _check_alpha(alpha)
    available = alpha * config.user_mass
    per_buyer = []
    threshold = 0
    for k, b in enumerate(config.budgets, start=1):
        cap = b / config.price
        if cap < available:
            per_buyer.append(cap)
            threshold = k
        else:
            per_buyer.append(available)
    return BuyerAllocation(per_buyer=tuple(per_buyer), threshold=threshold)


def expected_purchases(config: MarketConfig, alpha: float) -> float:
    """Expected number of buyers holding one participating user's data.

    Equals sum_k N_k / (alpha * N), a value in (0, K].
    """
    allocation = buyer_demand(config, alpha)
    return allocation.total / (alpha * config.user_mass)


def expected_cost(v: float, config: MarketConfig, alpha: float) -> float:
    """Expected privacy cost v * expected_purchases for a participating user."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"valuation must lie in [0, 1], got {v}")
    return v * expected_purchases(config, alpha)


def user_utility(
    v: float, config: MarketConfig, benefit: BenefitFunction, alpha: float
) -> float:
    """Net utility of a participating user; nonparticipation yields 0."""
    return benefit.eval(alpha, config.user_mass) - expected_cost(v, config, alpha)


def threshold_valuation(
    config: MarketConfig, benefit: BenefitFunction, alpha: float
) -> float:
    """Largest valuation still willing to participate at rate alpha.

    A user participates iff v <= alpha*N*Q(alpha) / sum_k N_k(alpha); ties
    break in favor of participation.
    """
    _check_alpha(alpha)
    allocation = buyer_demand(config, alpha)
    return (
        alpha * config.user_mass * benefit.eval(alpha, config.user_mass)
        / allocation.total
    )


def residual(
    config: MarketConfig,
    benefit: BenefitFunction,
    dist: ValuationDistribution,
    alpha: float,
) -> float:
    """Fixed-point residual alpha - F(threshold_valuation(alpha)).

    Zero exactly at the participation equilibria with alpha > 0.
    """
    return alpha - dist.cdf(threshold_valuation(config, benefit, alpha))


@dataclass(frozen=True)
class EquilibriumPoint:
    """A single equilibrium participation rate with its buyer-side detail."""

    alpha: float
    regime: str  # 'partial' | 'full' | 'trivial' (trivial only in baselines)
    threshold: int
    allocation: BuyerAllocation | None = None


@dataclass(frozen=True)
class EquilibriumInterval:
    """A continuum of equilibria [lo, hi] (open ends flagged explicitly)."""

    lo: float
    hi: float
    regime: str = "mixed"
    open_lo: bool = False
    open_hi: bool = False


@dataclass(frozen=True)
class EquilibriumSet:
    """All nontrivial equilibria of one instance at one price.

    ``source`` records provenance: 'analytic' (closed form), 'numeric'
    (grid + bisection), or 'oracle' (finite-agent empirical CDF).
    """

    points: tuple[EquilibriumPoint, ...]
    intervals: tuple[EquilibriumInterval, ...]
    source: str
    notes: tuple[str, ...] = ()

    @classmethod
    def build(
        cls,
        points=(),
        intervals=(),
        source: str = "analytic",
        notes=(),
    ) -> "EquilibriumSet":
        pts = tuple(sorted(points, key=lambda p: p.alpha))
        ivs = tuple(sorted(intervals, key=lambda iv: iv.lo))
        return cls(points=pts, intervals=ivs, source=source, notes=tuple(notes))

    @property
    def is_empty(self) -> bool:
        return not self.points and not self.intervals

    def alphas(self) -> list[float]:
        return [p.alpha for p in self.points]

    def segments(self) -> list[tuple[float, float]]:
        """Closed segments covering the set (points become degenerate)."""
        segs = [(p.alpha, p.alpha) for p in self.points]
        segs.extend((iv.lo, iv.hi) for iv in self.intervals)
        return sorted(segs)
