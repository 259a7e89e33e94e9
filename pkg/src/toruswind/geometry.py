"""Plane and torus points, closed parametrized curves, and curve types.

The torus is the square [0, 2π)² with opposite sides identified. Curves are
parametrized on t ∈ [0, 2π]; torus curves are given by a *lift* (real-valued
components that may leave the square) and wrapped on demand.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .expr import evaluate, parse_pair

TWO_PI = 2.0 * np.pi

SAMPLE_COUNT = 4096
EPS_CLOSE = 1e-9
EPS_REG = 1e-12
EPS_SNAP = 1e-6


class GeometryError(ValueError):
    pass


class TorusPoint(NamedTuple):
    u: float
    v: float


def _wrap(a):
    w = np.mod(a, TWO_PI)
    # mod of a tiny negative number rounds up to exactly 2π
    return np.where(w >= TWO_PI, 0.0, w)


def wrap_torus(u: float, v: float) -> TorusPoint:
    """Canonical representative of ``(u, v)`` in [0, 2π)²."""
    if not (np.isfinite(u) and np.isfinite(v)):
        raise GeometryError(f"cannot wrap non-finite point ({u}, {v})")
    return TorusPoint(float(_wrap(u)), float(_wrap(v)))


def wrap_array(points: np.ndarray) -> np.ndarray:
    """Vectorized :func:`wrap_torus` over the last axis of shape (..., 2)."""
    points = np.asarray(points, dtype=float)
    if not np.all(np.isfinite(points)):
        raise GeometryError("cannot wrap non-finite points")
    return _wrap(points)


def torus_distance(a, b) -> np.ndarray:
    """Flat quotient metric: per-axis min(|d|, 2π - |d|), combined Euclidean."""
    d = np.abs(wrap_array(a) - wrap_array(b))
    d = np.minimum(d, TWO_PI - d)
    return np.hypot(d[..., 0], d[..., 1])


@dataclass(frozen=True)
class ParamCurve:
    """Closed curve t ↦ (x(t), y(t)) on [0, 2π].

    ``x`` and ``y`` take and return numpy arrays. ``target`` is ``"plane"`` or
    ``"torus"``; for torus curves the components describe a lift.
    """

    x: Callable[[np.ndarray], np.ndarray]
    y: Callable[[np.ndarray], np.ndarray]
    target: str = "plane"
    sample_count: int = SAMPLE_COUNT
    label: str = ""

    def __post_init__(self):
        if self.target not in ("plane", "torus"):
            raise GeometryError(f"unknown curve target {self.target!r}")
        if self.sample_count < 4:
            raise GeometryError("sample_count must be at least 4")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return (
            np.broadcast_to(np.asarray(self.x(t), dtype=float), t.shape),
            np.broadcast_to(np.asarray(self.y(t), dtype=float), t.shape),
        )

    def sample(self, n: int | None = None, endpoint: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Parameters and points, shape (n,) and (n, 2), on a uniform grid."""
        n = self.sample_count if n is None else n
        t = np.linspace(0.0, TWO_PI, n + 1 if endpoint else n, endpoint=endpoint)
        xs, ys = self(t)
        return t, np.stack([xs, ys], axis=-1)

    def reversed(self) -> "ParamCurve":
        return replace(self, x=lambda t: self.x(TWO_PI - t), y=lambda t: self.y(TWO_PI - t), label=f"reversed({self.label})")

    def shifted(self, s: float) -> "ParamCurve":
        """Same curve started at parameter ``s``.

        For torus lifts the shifted components are taken modulo 2π in t and
        the lift jump is absorbed by wrapping, which is all the type needs.
        """
        return replace(
            self,
            x=lambda t: self.x(np.mod(t + s, TWO_PI)),
            y=lambda t: self.y(np.mod(t + s, TWO_PI)),
            label=f"shifted({self.label}, {s})",
        )

    def closure_gap(self) -> float:
        start = np.array([c[0] for c in self(np.array([0.0]))])
        end = np.array([c[0] for c in self(np.array([TWO_PI]))])
        if self.target == "torus":
            return float(torus_distance(start, end))
        return float(np.hypot(*(end - start)))

    def is_closed(self, eps: float = EPS_CLOSE) -> bool:
        return self.closure_gap() < eps

    def min_speed(self, n: int | None = None) -> float:
        """Smallest finite-difference tangent norm over the sample grid."""
        t, pts = self.sample(n, endpoint=False)
        h = t[1] - t[0]
        if self.target == "torus":
            _, lifted = self.sample(n, endpoint=True)
            step = np.diff(lifted, axis=0)
            step = step - TWO_PI * np.round(step / TWO_PI)
            tangent = 0.5 * (step + np.roll(step, 1, axis=0)) / h
        else:
            tangent = (np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)) / (2.0 * h)
        return float(np.hypot(tangent[:, 0], tangent[:, 1]).min())

    def check(self, eps_close: float = EPS_CLOSE, eps_reg: float = EPS_REG) -> None:
        """Raise :class:`GeometryError` if the curve is open or stalls."""
        gap = self.closure_gap()
        if not gap < eps_close:
            raise GeometryError(f"curve {self.label!r} is not closed (gap {gap:.3e})")
        speed = self.min_speed()
        if not speed > eps_reg:
            raise GeometryError(f"curve {self.label!r} has a stationary sample (speed {speed:.3e})")


def curve_from_expr(source: str, target: str = "plane", sample_count: int = SAMPLE_COUNT) -> ParamCurve:
    """Curve from a pair expression in ``t``, e.g. ``"(2*cos(t), sin(t))"``."""
    ex, ey = parse_pair(source, variables=("t",))
    return ParamCurve(
        x=lambda t: evaluate(ex, t=t),
        y=lambda t: evaluate(ey, t=t),
        target=target,
        sample_count=sample_count,
        label=source,
    )


def line_curve(p: float, q: float, offset=(0.0, 0.0), target: str = "torus", sample_count: int = SAMPLE_COUNT) -> ParamCurve:
    """The straight curve t ↦ (p t + offset_x, q t + offset_y)."""
    ox, oy = offset
    return ParamCurve(
        x=lambda t: p * np.asarray(t) + ox,
        y=lambda t: q * np.asarray(t) + oy,
        target=target,
        sample_count=sample_count,
        label=f"({p}t+{ox}, {q}t+{oy})",
    )


@dataclass(frozen=True)
class CurveType:
    p: int
    q: int
    residual: float = 0.0

    @property
    def essential(self) -> bool:
        return (self.p, self.q) != (0, 0)


def curve_type(curve: ParamCurve, eps_snap: float = EPS_SNAP) -> CurveType:
    """Lap counts (p, q) of a closed torus curve.

    The wrapped samples are unwrapped into a continuous lift; its total
    displacement divided by 2π must be within ``eps_snap`` of an integer.
    """
    if curve.target != "torus":
        raise GeometryError("curve_type needs a torus curve")
    gap = curve.closure_gap()
    if not gap < EPS_CLOSE:
        raise GeometryError(f"curve is not closed on the torus (gap {gap:.3e})")
    _, pts = curve.sample(endpoint=True)
    lift = np.unwrap(wrap_array(pts), axis=0)
    max_step = float(np.abs(np.diff(lift, axis=0)).max())
    if max_step >= np.pi / 2:
        raise GeometryError(f"curve moves {max_step:.3f} rad between samples; raise sample_count")
    laps = (lift[-1] - lift[0]) / TWO_PI
    snapped = np.round(laps)
    residual = float(np.abs(laps - snapped).max())
    if residual >= eps_snap:
        raise GeometryError(f"lap counts {laps} are not integral (residual {residual:.3e}); undersampled curve?")
    return CurveType(int(snapped[0]), int(snapped[1]), residual)


def curve_distance(first: ParamCurve, second: ParamCurve) -> float:
    """Minimum distance over all pairs of samples of the two curves.

    Torus curves use the flat quotient metric. This bounds the true distance
    from above by at most half the sampling spacing.
    """
    if first.target != second.target:
        raise GeometryError(f"curves live on different spaces ({first.target} vs {second.target})")
    _, a = first.sample()
    _, b = second.sample()
    if first.target == "torus":
        a = wrap_array(a)
        b = wrap_array(b)
        tree = cKDTree(a, boxsize=TWO_PI)
    else:
        tree = cKDTree(a)
    dist, _ = tree.query(b, k=1)
    return float(dist.min())
