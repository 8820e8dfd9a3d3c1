# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled grid kernels: equilibrium residual scan and incomplete beta.

Semantics match privmarket._kernels._grid_py bit-for-bit in the operations
used (same formulas, same branch structure); the pure version is the
import-time fallback when this extension is unavailable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, lgamma, log, log1p

cnp.import_array()

BACKEND = "cython"

cdef int _DIST_UNIFORM = 0
cdef int _DIST_PERSONALIZED = 1

DIST_UNIFORM = 0
DIST_PERSONALIZED = 1
DIST_EMPIRICAL = 2

cdef double P0 = 0.107
cdef double PM = 0.537
cdef double PH = 1.0 - P0 - PM

cdef int MAX_ITER = 500
cdef double ABS_TOL = 1e-10
cdef double TINY = 1e-300


cdef inline Py_ssize_t _lower_bound(const double[::1] arr, double v) noexcept nogil:
    # first index i with arr[i] >= v (count of elements < v)
    cdef Py_ssize_t lo = 0, hi = arr.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _upper_bound(const double[::1] arr, double v) noexcept nogil:
    # first index i with arr[i] > v (count of elements <= v)
    cdef Py_ssize_t lo = 0, hi = arr.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline double _cdf_scalar(
    double x, int dist_kind, double d0, const double[::1] samples
) noexcept nogil:
    cdef double f
    if dist_kind == _DIST_UNIFORM:
        f = x / d0
        return f if f < 1.0 else 1.0
    elif dist_kind == _DIST_PERSONALIZED:
        if x <= d0:
            f = P0 + PM * x / d0
        else:
            f = 1.0 - PH * (1.0 - x) / (1.0 - d0)
        return f if f < 1.0 else 1.0
    else:
        return (<double> _upper_bound(samples, x)) / (<double> samples.shape[0])


def residual_grid(
    cnp.ndarray alphas,
    cnp.ndarray benefit_vals,
    double user_mass,
    cnp.ndarray caps,
    cnp.ndarray caps_cumsum,
    int dist_kind,
    double d0,
    cnp.ndarray samples,
):
    """See privmarket._kernels._grid_py.residual_grid."""
    cdef const double[::1] al = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef const double[::1] qv = np.ascontiguousarray(benefit_vals, dtype=np.float64)
    cdef const double[::1] cp = np.ascontiguousarray(caps, dtype=np.float64)
    cdef const double[::1] cs = np.ascontiguousarray(caps_cumsum, dtype=np.float64)
    cdef const double[::1] sm = np.ascontiguousarray(samples, dtype=np.float64)
    cdef Py_ssize_t n = al.shape[0], k = cp.shape[0], i, idx
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double available, total, thresh
    with nogil:
        for i in range(n):
            available = al[i] * user_mass
            idx = _lower_bound(cp, available)
            total = cs[idx] + (<double> (k - idx)) * available
            thresh = available * qv[i] / total
            out[i] = al[i] - _cdf_scalar(thresh, dist_kind, d0, sm)
    return out_arr


cdef double _betacf(double a, double b, double x) except -1.0:
    cdef double qab = a + b, qap = a + 1.0, qam = a - 1.0
    cdef double c = 1.0, d, h, aa, delta
    cdef int m, m2
    d = 1.0 - qab * x / qap
    if fabs(d) < TINY:
        d = TINY
    d = 1.0 / d
    h = d
    for m in range(1, MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if fabs(c) < TINY:
            c = TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if fabs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < ABS_TOL:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction failed to converge (a={a}, b={b}, x={x})"
    )


cdef double _betainc_scalar(double x, double a, double b) except -1.0:
    cdef double front
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    front = exp(
        lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def betainc_vec(cnp.ndarray x, double a, double b):
    """Regularized incomplete beta I_x(a, b) elementwise."""
    if not (a > 0 and b > 0):
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    flat = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef double[::1] xv = flat
    cdef Py_ssize_t n = xv.shape[0], i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        if not 0.0 <= xv[i] <= 1.0:
            raise ValueError(f"x must lie in [0, 1], got {xv[i]}")
        out[i] = _betainc_scalar(xv[i], a, b)
    return out_arr.reshape(np.asarray(x).shape)
