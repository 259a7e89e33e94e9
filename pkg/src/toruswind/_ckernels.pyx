# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Signatures and results mirror ``_pykernels``."""
import numpy as np

from libc.math cimport sqrt, fabs, floor, M_PI


cdef inline void _add(double* acc, double* comp, double x) noexcept nogil:
    # Neumaier summation; a plain running sum drifts by ~1e-9 at 2**20 terms
    cdef double s = acc[0] + x
    if fabs(acc[0]) >= fabs(x):
        comp[0] += (acc[0] - s) + x
    else:
        comp[0] += (x - s) + acc[0]
    acc[0] = s


def winding_integral(const double[::1] P, const double[::1] Q, double h):
    cdef Py_ssize_t n = P.shape[0]
    cdef Py_ssize_t k, kp1, kp2, km1, km2
    cdef double dP, dQ, norm2, val
    cdef double s_odd = 0.0, s_even = 0.0, c_odd = 0.0, c_even = 0.0
    cdef double min_norm2 = P[0] * P[0] + Q[0] * Q[0]
    cdef double inv = 1.0 / (12.0 * h)
    if n < 4 or n % 2:
        raise ValueError("need an even number (>= 4) of periodic samples")
    for k in range(n):
        kp1 = k + 1 if k + 1 < n else k + 1 - n
        kp2 = k + 2 if k + 2 < n else k + 2 - n
        km1 = k - 1 if k >= 1 else k - 1 + n
        km2 = k - 2 if k >= 2 else k - 2 + n
        dP = (-P[kp2] + 8.0 * P[kp1] - 8.0 * P[km1] + P[km2]) * inv
        dQ = (-Q[kp2] + 8.0 * Q[kp1] - 8.0 * Q[km1] + Q[km2]) * inv
        norm2 = P[k] * P[k] + Q[k] * Q[k]
        if norm2 < min_norm2:
            min_norm2 = norm2
        if norm2 > 0.0:
            val = (P[k] * dQ - Q[k] * dP) / norm2
        else:
            val = 0.0
        if k % 2:
            _add(&s_odd, &c_odd, val)
        else:
            _add(&s_even, &c_even, val)
    s_odd += c_odd
    s_even += c_even
    return (h / 3.0) * (4.0 * s_odd + 2.0 * s_even) / (2.0 * M_PI), sqrt(min_norm2)


def unwrap_total(const double[::1] theta):
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t k
    cdef double d, total = 0.0, comp = 0.0, max_jump = 0.0
    cdef double two_pi = 2.0 * M_PI
    for k in range(n - 1):
        d = theta[k + 1] - theta[k]
        d = d - two_pi * floor((d + M_PI) / two_pi)
        _add(&total, &comp, d)
        if fabs(d) > max_jump:
            max_jump = fabs(d)
    return total + comp, max_jump


def cumulative_simpson(const double[:, ::1] F, const double[:, ::1] M, double dx, Py_ssize_t anchor):
    cdef Py_ssize_t rows = F.shape[0]
    cdef Py_ssize_t n = F.shape[1]
    cdef Py_ssize_t r, k
    cdef double w = dx / 6.0
    out_arr = np.zeros((rows, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    if M.shape[0] != rows or M.shape[1] != n - 1:
        raise ValueError("midpoint array must have one fewer column than nodes")
    if anchor < 0 or anchor >= n:
        raise ValueError("anchor index out of range")
    for r in range(rows):
        for k in range(anchor + 1, n):
            out[r, k] = out[r, k - 1] + w * (F[r, k - 1] + 4.0 * M[r, k - 1] + F[r, k])
        for k in range(anchor - 1, -1, -1):
            out[r, k] = out[r, k + 1] - w * (F[r, k] + 4.0 * M[r, k] + F[r, k + 1])
    return out_arr
