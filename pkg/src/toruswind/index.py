"""Winding-number index of a plane vector field along a closed curve.

Two independent routes are provided:

* :func:`index_quadrature` integrates det(V, V') / |V|² over t ∈ [0, 2π]
  with V(t) = X(γ(t)), using periodic composite Simpson and a periodic
  fourth-order difference for V'.
* :func:`index_unwrap` follows the angle atan2(Q, P) along a dense grid and
  counts its total change.

Both refine by grid doubling and return an :class:`IndexResult`.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import kernels
from .field import EPS_ZERO, FieldZeroError, PlaneVectorField
from .geometry import TWO_PI, ParamCurve

QUAD_TOL = 1e-9
UNWRAP_TOL = 1e-9
MAX_PANELS = 2**20
SNAP_OK = 1e-3
SNAP_FAIL = 1e-1

Sampler = Callable[[np.ndarray], tuple]


class IndexComputationError(ArithmeticError):
    pass


class FieldZeroOnCurveError(IndexComputationError, FieldZeroError):
    pass


class NonConvergenceError(IndexComputationError):
    pass


class SnapError(IndexComputationError):
    pass


class UndersampledError(IndexComputationError):
    pass


@dataclass(frozen=True)
class IndexResult:
    raw: float
    snapped: int
    snap_residual: float
    panels: int
    min_field_norm: float
    method: str
    status: str

    @property
    def valid(self) -> bool:
        return self.status == "ok"

    @property
    def angle_change(self) -> float:
        """Total turning of the field along the curve, in radians."""
        return TWO_PI * self.raw

    def as_dict(self) -> dict:
        return asdict(self)


def _finish(raw: float, panels: int, min_norm: float, method: str, snap_tol: float) -> IndexResult:
    snapped = int(np.round(raw))
    residual = abs(raw - snapped)
    if residual >= SNAP_FAIL:
        raise SnapError(f"{method} index {raw:.6f} is far from an integer; zero crossing or sampling failure")
    status = "ok" if residual < snap_tol else "suspicious"
    return IndexResult(float(raw), snapped, float(residual), int(panels), float(min_norm), method, status)


def _curve_sampler(X: PlaneVectorField, curve: ParamCurve) -> Sampler:
    if curve.target != "plane":
        raise ValueError("the index is computed along plane curves")

    def sampler(t):
        return X(*curve(t))

    return sampler


def quadrature_from_sampler(
    sampler: Sampler,
    tol: float = QUAD_TOL,
    start_panels: int = 64,
    max_panels: int = MAX_PANELS,
    snap_tol: float = SNAP_OK,
    eps_zero: float = EPS_ZERO,
) -> IndexResult:
    """Index from a callable ``t -> (P, Q)`` giving the field along the curve.

    Panels double until successive values agree to ``tol``. Each level only
    evaluates the new midpoints.
    """
    n = start_panels
    t = np.arange(n) * (TWO_PI / n)
    P, Q = (np.array(np.broadcast_to(c, t.shape), dtype=float) for c in sampler(t))
    prev = None
    while True:
        raw, min_norm = kernels.winding_integral(P, Q, TWO_PI / n)
        if not min_norm > eps_zero:
            raise FieldZeroOnCurveError(f"field vanishes on the curve (min norm {min_norm:.3e})")
        if prev is not None and abs(raw - prev) < tol:
            break
        if n >= max_panels:
            raise NonConvergenceError(f"quadrature did not settle by {n} panels (last change {abs(raw - prev):.3e})")
        prev = raw
        h = TWO_PI / (2 * n)
        mid = (2 * np.arange(n) + 1) * h
        Pm, Qm = (np.broadcast_to(c, mid.shape) for c in sampler(mid))
        P = np.column_stack([P, Pm]).ravel()
        Q = np.column_stack([Q, Qm]).ravel()
        n *= 2
    return _finish(raw, n, min_norm, "quadrature", snap_tol)


def unwrap_from_sampler(
    sampler: Sampler,
    tol: float = UNWRAP_TOL,
    start_samples: int = 256,
    max_samples: int = MAX_PANELS,
    snap_tol: float = SNAP_OK,
    eps_zero: float = EPS_ZERO,
) -> IndexResult:
    """Index as the unwrapped change of atan2(Q, P) from t = 0 to t = 2π.

    Only jumps of at least π/2 between samples are detectable; a field that
    spins so fast that its per-sample step aliases below π/2 at every grid
    tried is indistinguishable from a slower one.
    """
    n = start_samples
    prev = None
    while True:
        t = np.linspace(0.0, TWO_PI, n + 1)
        P, Q = (np.broadcast_to(c, t.shape) for c in sampler(t))
        min_norm = float(np.hypot(P, Q).min())
        if not min_norm > eps_zero:
            raise FieldZeroOnCurveError(f"field vanishes on the curve (min norm {min_norm:.3e})")
        total, max_jump = kernels.unwrap_total(np.arctan2(Q, P))
        raw = total / TWO_PI
        if max_jump < np.pi / 2 and prev is not None and abs(raw - prev) < tol:
            break
        if n >= max_samples:
            if max_jump >= np.pi / 2:
                raise UndersampledError(f"angle jumps by {max_jump:.3f} rad between samples at the finest grid")
            raise NonConvergenceError("angle unwrapping did not stabilize")
        prev = raw
        n *= 2
    return _finish(raw, n, min_norm, "unwrap", snap_tol)


def index_quadrature(X: PlaneVectorField, curve: ParamCurve, **options) -> IndexResult:
    """Index of ``X`` along ``curve`` by quadrature of the winding integral."""
    return quadrature_from_sampler(_curve_sampler(X, curve), **options)


def index_unwrap(X: PlaneVectorField, curve: ParamCurve, **options) -> IndexResult:
    """Index of ``X`` along ``curve`` by angle unwrapping (independent oracle)."""
    return unwrap_from_sampler(_curve_sampler(X, curve), **options)


def index_both(X: PlaneVectorField, curve: ParamCurve) -> tuple[IndexResult, IndexResult, float]:
    """Both routes and the absolute difference of their raw values."""
    quad = index_quadrature(X, curve)
    unwrap = index_unwrap(X, curve)
    return quad, unwrap, abs(quad.raw - unwrap.raw)
