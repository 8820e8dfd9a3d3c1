"""Distribution- and benefit-agnostic equilibrium finder.

Scans the fixed-point residual alpha - F(threshold_valuation(alpha)) on a
dense uniform grid over (0, 1], refines isolated sign changes by bisection,
detects genuine continua of equilibria, sweeps over prices, and provides a
finite-agent empirical oracle (the same scan against the empirical CDF of n
sampled valuations) for independent validation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .constant import solve_constant
from .core import (
    BenefitFunction,
    ConstantBenefit,
    EmpiricalValuations,
    EquilibriumInterval,
    EquilibriumPoint,
    EquilibriumSet,
    LinearBenefit,
    MarketConfig,
    PersonalizedValuations,
    UniformValuations,
    ValuationDistribution,
    buyer_demand,
    residual,
)
from .linear import solve_linear

__all__ = [
    "SolverSettings",
    "SweepRow",
    "SweepResult",
    "closed_form",
    "residuals_on_grid",
    "grid_equilibria",
    "refine_root",
    "empirical_oracle",
    "sweep",
]

_EMPTY = np.empty(0, dtype=np.float64)


@dataclass(frozen=True)
class SolverSettings:
    """Grid-scan parameters.

    ``tolerance`` is the residual magnitude accepted as an (unrefined) hit;
    ``refine_tolerance`` is the bisection target; runs of at least
    ``interval_min_run`` consecutive machine-precision hits are candidates
    for a continuum of equilibria.
    """

    grid_points: int = 4096
    tolerance: float = 2e-3
    refine_tolerance: float = 1e-10
    interval_min_run: int = 3

    def __post_init__(self) -> None:
        if self.grid_points < 16:
            raise ValueError(f"grid_points must be >= 16, got {self.grid_points}")
        if not self.tolerance > self.refine_tolerance > 0:
            raise ValueError(
                "tolerances must satisfy tolerance > refine_tolerance > 0, got "
                f"{self.tolerance} and {self.refine_tolerance}"
            )
        if self.interval_min_run < 1:
            raise ValueError("interval_min_run must be positive")


def _dist_kernel_params(
    dist: ValuationDistribution,
) -> tuple[int, float, np.ndarray]:
    if isinstance(dist, UniformValuations):
        return _kernels.DIST_UNIFORM, dist.scale, _EMPTY
    if isinstance(dist, PersonalizedValuations):
        return _kernels.DIST_PERSONALIZED, dist.v_m, _EMPTY
    if isinstance(dist, EmpiricalValuations):
        return _kernels.DIST_EMPIRICAL, 0.0, dist.samples
    raise TypeError(f"unsupported valuation distribution {type(dist).__name__}")


def residuals_on_grid(
    config: MarketConfig,
    benefit: BenefitFunction,
    dist: ValuationDistribution,
    alphas: np.ndarray,
) -> np.ndarray:
    """Vectorized residual evaluation (delegates to the selected kernel)."""
    alphas = np.asarray(alphas, dtype=np.float64)
    caps = np.asarray(config.caps(), dtype=np.float64)
    caps_cumsum = np.concatenate(([0.0], np.cumsum(caps)))
    dist_kind, d0, samples = _dist_kernel_params(dist)
    benefit_vals = np.asarray(
        benefit.eval_grid(alphas, config.user_mass), dtype=np.float64
    )
    return _kernels.residual_grid(
        alphas,
        benefit_vals,
        config.user_mass,
        caps,
        caps_cumsum,
        dist_kind,
        d0,
        samples,
    )


def refine_root(
    config: MarketConfig,
    benefit: BenefitFunction,
    dist: ValuationDistribution,
    lo: float,
    hi: float,
    refine_tolerance: float = 1e-10,
) -> float:
    """Bisect a sign-changing residual bracket down to refine_tolerance.

    Returns the evaluated alpha with the smallest |residual| seen, so the
    result never has a worse residual than either bracket endpoint.
    """
    if not 0.0 < lo < hi <= 1.0:
        raise ValueError(f"bracket must satisfy 0 < lo < hi <= 1, got ({lo}, {hi})")
    r_lo = residual(config, benefit, dist, lo)
    r_hi = residual(config, benefit, dist, hi)
    if r_lo == 0.0:
        return lo
    if r_hi == 0.0:
        return hi
    if (r_lo > 0) == (r_hi > 0):
        raise ValueError(f"residual does not change sign on ({lo}, {hi})")
    best_alpha, best_res = (lo, abs(r_lo)) if abs(r_lo) <= abs(r_hi) else (hi, abs(r_hi))
    while hi - lo > refine_tolerance and best_res > refine_tolerance:
        mid = 0.5 * (lo + hi)
        r_mid = residual(config, benefit, dist, mid)
        if abs(r_mid) < best_res:
            best_alpha, best_res = mid, abs(r_mid)
        if r_mid == 0.0:
            break
        if (r_mid > 0) == (r_lo > 0):
            lo, r_lo = mid, r_mid
        else:
            hi, r_hi = mid, r_mid
    return best_alpha


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True as inclusive (start, end) index pairs."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [idx.size - 1]))
    return [(int(idx[s]), int(idx[e])) for s, e in zip(starts, ends)]


def grid_equilibria(
    config: MarketConfig,
    benefit: BenefitFunction,
    dist: ValuationDistribution,
    settings: SolverSettings | None = None,
) -> EquilibriumSet:
    """All nontrivial equilibria found by the dense grid scan.

    The grid is alpha_i = i / grid_points for i = 1..grid_points, so alpha=1
    is always on-grid and alpha=0 never is. A run of consecutive grid points
    whose residual is zero to machine precision (confirmed on a 4x-refined
    subgrid) is reported as a continuum; all other residual hits and sign
    changes collapse to bisection-refined isolated roots. Roots within
    ``tolerance`` of the trivial equilibrium alpha=0 are discarded.
    """
    s = settings or SolverSettings()
    g = s.grid_points
    step = 1.0 / g
    alphas = np.arange(1, g + 1, dtype=np.float64) / g
    res = residuals_on_grid(config, benefit, dist, alphas)

    # Continuum detection: a genuine continuum has residual ~ machine epsilon
    # on every point, far below the scan tolerance an isolated root's
    # neighbors can reach.
    continuum_tol = 10.0 * s.refine_tolerance
    covered = np.zeros(g, dtype=bool)
    intervals: list[EquilibriumInterval] = []
    tiny = np.abs(res) <= continuum_tol
    for i0, i1 in _runs(tiny):
        if i1 - i0 + 1 < s.interval_min_run:
            continue
        fine = np.linspace(alphas[i0], alphas[i1], 4 * (i1 - i0) + 1)
        fine_res = residuals_on_grid(config, benefit, dist, fine)
        if float(np.max(np.abs(fine_res))) <= continuum_tol:
            intervals.append(
                EquilibriumInterval(lo=float(alphas[i0]), hi=float(alphas[i1]))
            )
            covered[i0 : i1 + 1] = True

    # Isolated roots: bisect every uncovered sign change.
    candidates: list[tuple[float, float]] = []  # (alpha, |residual|)
    sign_change_alphas: list[float] = []
    for i in range(g - 1):
        if covered[i] or covered[i + 1]:
            continue
        if res[i] * res[i + 1] < 0.0:
            root = refine_root(
                config,
                benefit,
                dist,
                float(alphas[i]),
                float(alphas[i + 1]),
                s.refine_tolerance,
            )
            candidates.append((root, abs(residual(config, benefit, dist, root))))
            sign_change_alphas.append(root)

    # Tangential hits (|residual| <= tolerance without a sign change): keep
    # the best grid point of each run not already explained by a refined root.
    hits = (np.abs(res) <= s.tolerance) & ~covered
    for i0, i1 in _runs(hits):
        lo_a, hi_a = alphas[i0] - step, alphas[i1] + step
        if any(lo_a <= a <= hi_a for a in sign_change_alphas):
            continue
        j = i0 + int(np.argmin(np.abs(res[i0 : i1 + 1])))
        candidates.append((float(alphas[j]), float(abs(res[j]))))

    # Drop near-trivial roots and roots abutting a detected continuum.
    def _near_interval(a: float) -> bool:
        return any(iv.lo - step <= a <= iv.hi + step for iv in intervals)

    candidates = [
        (a, r) for a, r in candidates if a > s.tolerance and not _near_interval(a)
    ]

    # Merge roots closer than one grid step (tolerance may fuse distinct
    # equilibria); keep the better residual and flag the merge.
    candidates.sort()
    merged: list[tuple[float, float]] = []
    notes: list[str] = []
    for a, r in candidates:
        if merged and a - merged[-1][0] <= step:
            if r < merged[-1][1]:
                merged[-1] = (a, r)
            notes.append(f"possible merged equilibria near alpha={a:.6g}")
        else:
            merged.append((a, r))

    points = []
    for a, _ in merged:
        if 1.0 - a <= s.refine_tolerance:
            a = 1.0
        allocation = buyer_demand(config, a)
        points.append(
            EquilibriumPoint(
                alpha=a,
                regime="full" if a == 1.0 else "partial",
                threshold=allocation.threshold,
                allocation=allocation,
            )
        )
    return EquilibriumSet.build(
        points=tuple(points),
        intervals=tuple(intervals),
        source="numeric",
        notes=tuple(notes),
    )


def empirical_oracle(
    config: MarketConfig,
    benefit: BenefitFunction,
    dist: ValuationDistribution,
    n: int,
    seed: int,
    settings: SolverSettings | None = None,
) -> EquilibriumSet:
    """Grid scan against the empirical CDF of n seeded valuation draws.

    Uses a counter-based generator so results are deterministic for a fixed
    seed and independent of any global random state.
    """
    if n < 1:
        raise ValueError(f"sample size must be positive, got {n}")
    rng = np.random.Generator(np.random.Philox(seed))
    empirical = EmpiricalValuations(dist.sample(n, rng))
    result = grid_equilibria(config, benefit, empirical, settings)
    return replace(result, source="oracle")


def closed_form(
    config: MarketConfig,
    benefit: BenefitFunction,
    dist: ValuationDistribution,
) -> EquilibriumSet | None:
    """Analytic solution when the instance has one; None otherwise.

    Closed forms exist for constant and linear benefits under valuations
    uniform on [0, 1].
    """
    if not (isinstance(dist, UniformValuations) and dist.scale == 1.0):
        return None
    if isinstance(benefit, ConstantBenefit) and benefit.q > 0:
        return solve_constant(config, benefit.q)
    if isinstance(benefit, LinearBenefit):
        return solve_linear(config, benefit.c)
    return None


@dataclass(frozen=True)
class SweepRow:
    price: float
    equilibria: EquilibriumSet
    analytic: EquilibriumSet | None = None


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]


def sweep(
    config: MarketConfig,
    benefit: BenefitFunction,
    dist: ValuationDistribution,
    prices,
    settings: SolverSettings | None = None,
) -> SweepResult:
    """Numeric solve at each price, each computed independently.

    When the instance is a recognized closed-form case, the analytic set is
    attached to each row as a cross-check.
    """
    prices = [float(p) for p in prices]
    if any(not p > 0 for p in prices):
        raise ValueError("prices must be positive")
    if any(a >= b for a, b in zip(prices, prices[1:])):
        raise ValueError("prices must be strictly increasing")
    rows = []
    for p in prices:
        cfg = replace(config, price=p)
        numeric = grid_equilibria(cfg, benefit, dist, settings)
        rows.append(
            SweepRow(price=p, equilibria=numeric, analytic=closed_form(cfg, benefit, dist))
        )
    return SweepResult(rows=tuple(rows))
