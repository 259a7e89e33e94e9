"""Numpy implementations of the inner loops, used when the extension is not built."""
import numpy as np


def winding_integral(P, Q, h):
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    n = P.shape[0]
    if n < 4 or n % 2:
        raise ValueError("need an even number (>= 4) of periodic samples")

    def deriv(v):
        return (-np.roll(v, -2) + 8.0 * np.roll(v, -1) - 8.0 * np.roll(v, 1) + np.roll(v, 2)) / (12.0 * h)

    dP = deriv(P)
    dQ = deriv(Q)
    norm2 = P * P + Q * Q
    safe = np.where(norm2 > 0.0, norm2, 1.0)
    val = np.where(norm2 > 0.0, (P * dQ - Q * dP) / safe, 0.0)
    s_odd = val[1::2].sum()
    s_even = val[0::2].sum()
    return (h / 3.0) * (4.0 * s_odd + 2.0 * s_even) / (2.0 * np.pi), float(np.sqrt(norm2.min()))


def unwrap_total(theta):
    d = np.diff(np.asarray(theta, dtype=float))
    d = d - 2.0 * np.pi * np.floor((d + np.pi) / (2.0 * np.pi))
    if d.size == 0:
        return 0.0, 0.0
    return float(d.sum()), float(np.abs(d).max())


def cumulative_simpson(F, M, dx, anchor):
    F = np.asarray(F, dtype=float)
    M = np.asarray(M, dtype=float)
    rows, n = F.shape
    if M.shape != (rows, n - 1):
        raise ValueError("midpoint array must have one fewer column than nodes")
    if not 0 <= anchor < n:
        raise ValueError("anchor index out of range")
    pieces = (dx / 6.0) * (F[:, :-1] + 4.0 * M + F[:, 1:])
    out = np.zeros((rows, n))
    out[:, anchor + 1:] = np.cumsum(pieces[:, anchor:], axis=1)
    if anchor > 0:
        out[:, :anchor] = -np.cumsum(pieces[:, :anchor][:, ::-1], axis=1)[:, ::-1]
    return out
