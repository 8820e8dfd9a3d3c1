"""Pure-numpy fallback for the hot grid kernels.

Mirrors the compiled extension in privmarket._kernels._grid exactly; the
backend is selected once at import in privmarket._kernels.
"""

from __future__ import annotations

import numpy as np

from ..special import regularized_incomplete_beta

BACKEND = "python"

# distribution dispatch tags (shared with the compiled kernel)
DIST_UNIFORM = 0
DIST_PERSONALIZED = 1
DIST_EMPIRICAL = 2

_P0 = 0.107  # mass at v = 0
_PM = 0.537  # mass uniform on (0, v_m]
_PH = 1.0 - _P0 - _PM  # mass uniform on (v_m, 1]


def cdf_vec(x: np.ndarray, dist_kind: int, d0: float, samples: np.ndarray) -> np.ndarray:
    """Right-continuous CDF of the privacy-valuation distribution at x >= 0."""
    x = np.asarray(x, dtype=float)
    if dist_kind == DIST_UNIFORM:
        return np.minimum(1.0, x / d0)
    if dist_kind == DIST_PERSONALIZED:
        low = _P0 + _PM * x / d0
        high = 1.0 - _PH * (1.0 - x) / (1.0 - d0)
        return np.minimum(1.0, np.where(x <= d0, low, high))
    if dist_kind == DIST_EMPIRICAL:
        return np.searchsorted(samples, x, side="right") / samples.size
    raise ValueError(f"unknown distribution kind {dist_kind}")


def residual_grid(
    alphas: np.ndarray,
    benefit_vals: np.ndarray,
    user_mass: float,
    caps: np.ndarray,
    caps_cumsum: np.ndarray,
    dist_kind: int,
    d0: float,
    samples: np.ndarray,
) -> np.ndarray:
    """Equilibrium residual alpha - F(alpha*N*Q(alpha) / sum_k N_k) on a grid.

    ``caps`` are the ascending per-buyer masses B_k / P and ``caps_cumsum``
    their prefix sums with a leading 0. ``d0`` is the scale V (uniform) or
    v_m (personalized); ``samples`` is the sorted sample array (empirical).
    """
    alphas = np.asarray(alphas, dtype=float)
    available = alphas * user_mass
    k = len(caps)
    idx = np.searchsorted(caps, available, side="left")
    total = caps_cumsum[idx] + (k - idx) * available
    thresh = available * np.asarray(benefit_vals, dtype=float) / total
    return alphas - cdf_vec(thresh, dist_kind, d0, samples)


def betainc_vec(x: np.ndarray, a: float, b: float) -> np.ndarray:
    """Regularized incomplete beta I_x(a, b) elementwise."""
    x = np.asarray(x, dtype=float)
    return np.array([regularized_incomplete_beta(v, a, b) for v in x.ravel()]).reshape(
        x.shape
    )
