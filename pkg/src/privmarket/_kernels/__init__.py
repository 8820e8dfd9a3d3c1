"""Grid kernels: compiled extension when built, pure-numpy fallback otherwise.

``BACKEND`` reports which implementation was selected at import time.
``benchmarks/bench_kernels.py`` compares the two head to head.
"""

try:
    from ._grid import (  # type: ignore[attr-defined]
        BACKEND,
        DIST_EMPIRICAL,
        DIST_PERSONALIZED,
        DIST_UNIFORM,
        betainc_vec,
        residual_grid,
    )
except ImportError:  # extension not built; fall back to pure numpy
    from ._grid_py import (
        BACKEND,
        DIST_EMPIRICAL,
        DIST_PERSONALIZED,
        DIST_UNIFORM,
        betainc_vec,
        residual_grid,
    )

__all__ = [
    "BACKEND",
    "DIST_UNIFORM",
    "DIST_PERSONALIZED",
    "DIST_EMPIRICAL",
    "residual_grid",
    "betainc_vec",
]
