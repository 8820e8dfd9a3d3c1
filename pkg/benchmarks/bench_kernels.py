"""Head-to-head benchmark of the compiled and pure-Python grid kernels.

Run:  python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import importlib
import time

import numpy as np

from privmarket._kernels import _grid_py


def _load_backends():
    backends = {"python": _grid_py}
    try:
        backends["cython"] = importlib.import_module("privmarket._kernels._grid")
    except ImportError:
        print("compiled extension not available; benchmarking pure backend only")
    return backends


def _time(fn, *args, repeat: int = 7) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_residual(backends, grid_points: int, n_samples: int) -> None:
    rng = np.random.default_rng(0)
    alphas = np.arange(1, grid_points + 1, dtype=np.float64) / grid_points
    benefit_vals = np.full(grid_points, 2.5)
    caps = np.sort(rng.uniform(0.05, 2.0, size=8))
    caps_cumsum = np.concatenate(([0.0], np.cumsum(caps)))
    samples = np.sort(rng.random(n_samples))

    print(f"\nresidual_grid: grid={grid_points}, empirical n={n_samples}")
    ref = None
    times = {}
    for name, mod in backends.items():
        out = mod.residual_grid(
            alphas, benefit_vals, 1.0, caps, caps_cumsum, mod.DIST_EMPIRICAL, 0.0, samples
        )
        if ref is None:
            ref = out
        else:
            assert np.array_equal(ref, out), "backends disagree"
        times[name] = _time(
            mod.residual_grid,
            alphas,
            benefit_vals,
            1.0,
            caps,
            caps_cumsum,
            mod.DIST_EMPIRICAL,
            0.0,
            samples,
        )
    for name, t in times.items():
        print(f"  {name:7s} {t * 1e3:9.3f} ms")
    if len(times) == 2:
        print(f"  speedup {times['python'] / times['cython']:.2f}x")


def bench_betainc(backends, n: int) -> None:
    x = np.linspace(0.0, 1.0, n)
    print(f"\nbetainc_vec: n={n}, (a, b)=(5, 10)")
    ref = None
    times = {}
    for name, mod in backends.items():
        out = mod.betainc_vec(x, 5.0, 10.0)
        if ref is None:
            ref = out
        else:
            assert np.allclose(ref, out, atol=1e-12), "backends disagree"
        times[name] = _time(mod.betainc_vec, x, 5.0, 10.0)
    for name, t in times.items():
        print(f"  {name:7s} {t * 1e3:9.3f} ms")
    if len(times) == 2:
        print(f"  speedup {times['python'] / times['cython']:.2f}x")


def main() -> None:
    backends = _load_backends()
    bench_residual(backends, grid_points=4096, n_samples=100_000)
    bench_residual(backends, grid_points=65_536, n_samples=1_000_000)
    bench_betainc(backends, n=4096)


if __name__ == "__main__":
    main()
