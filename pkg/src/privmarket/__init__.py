"""Equilibria of a two-sided data marketplace with endogenous privacy costs.

Closed-form solvers for constant and linear participation benefits, a
distribution- and benefit-agnostic numeric grid solver with a finite-agent
empirical oracle, and a CLI for price-sweep experiments.
"""

from ._kernels import BACKEND
from .constant import (
    ConstantThresholds,
    classify_constant,
    exogenous_constant,
    find_k_bar,
    solve_constant,
    thresholds,
)
from .core import (
    BenefitFunction,
    BuyerAllocation,
    ConstantBenefit,
    EmpiricalValuations,
    EquilibriumInterval,
    EquilibriumPoint,
    EquilibriumSet,
    LinearBenefit,
    MarketConfig,
    PersonalizedValuations,
    PowerBenefit,
    SShapedBenefit,
    UniformValuations,
    ValuationDistribution,
    buyer_demand,
    cumulative_budget,
    expected_cost,
    expected_purchases,
    residual,
    threshold_valuation,
    user_utility,
)
from .linear import (
    LinearThresholds,
    classify_linear,
    exogenous_linear,
    find_k_hat,
    find_k_tilde,
    linear_thresholds,
    solve_linear,
)
from .solver import (
    SolverSettings,
    SweepResult,
    SweepRow,
    closed_form,
    empirical_oracle,
    grid_equilibria,
    refine_root,
    residuals_on_grid,
    sweep,
)
from .special import regularized_incomplete_beta

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    # core types
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
    # core operations
    "buyer_demand",
    "cumulative_budget",
    "expected_purchases",
    "expected_cost",
    "user_utility",
    "threshold_valuation",
    "residual",
    # constant-benefit closed forms
    "ConstantThresholds",
    "thresholds",
    "classify_constant",
    "find_k_bar",
    "solve_constant",
    "exogenous_constant",
    # linear-benefit closed forms
    "LinearThresholds",
    "linear_thresholds",
    "classify_linear",
    "find_k_hat",
    "find_k_tilde",
    "solve_linear",
    "exogenous_linear",
    # numeric solver
    "SolverSettings",
    "SweepRow",
    "SweepResult",
    "closed_form",
    "residuals_on_grid",
    "grid_equilibria",
    "refine_root",
    "empirical_oracle",
    "sweep",
    # special functions
    "regularized_incomplete_beta",
]
