"""First integrals built from a uniformizing map ψ = (f, g) and a slope (a, b).

The gradient of the candidate h is prescribed as::

    h_x = b f_x - a f_y
    h_y = b g_x - a g_y

and h is recovered on a rectangular grid by Simpson line integration from an
anchor node. The system is only solvable when its mixed partials agree, so
:func:`build_first_integral` checks that first and refuses otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import RectBivariateSpline

from . import kernels
from .field import Diffeo2, PlaneVectorField, ScalarField2

CURL_TOL = 1e-5
SECOND_STEP = 1e-4
RK4_STEP = 1e-3


class IntegrabilityError(ArithmeticError):
    pass


class PathDependenceError(ArithmeticError):
    pass


def torus_first_integral(a: float, b: float) -> ScalarField2:
    """H(u, v) = b u - a v, a first integral of the constant field a ∂u + b ∂v."""
    if a == 0 and b == 0:
        raise ValueError("(a, b) must not be (0, 0)")
    return ScalarField2(lambda u, v: b * np.asarray(u, dtype=float) - a * np.asarray(v, dtype=float), label=f"{b!r}*u - {a!r}*v")


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"empty rectangle {self}")

    @classmethod
    def parse(cls, text: str) -> "Rect":
        parts = [float(v) for v in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"domain needs 'x0,x1,y0,y1', got {text!r}")
        return cls(*parts)

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.x1 - self.x0, self.y1 - self.y0))

    def nodes(self, resolution: int):
        return np.linspace(self.x0, self.x1, resolution + 1), np.linspace(self.y0, self.y1, resolution + 1)


def _second_partials(fn, x, y, base: float = SECOND_STEP):
    hx = base * np.maximum(1.0, np.abs(x))
    hy = base * np.maximum(1.0, np.abs(y))
    f0 = fn(x, y)
    fxx = (fn(x + hx, y) - 2.0 * f0 + fn(x - hx, y)) / hx**2
    fyy = (fn(x, y + hy) - 2.0 * f0 + fn(x, y - hy)) / hy**2
    fxy = (fn(x + hx, y + hy) - fn(x + hx, y - hy) - fn(x - hx, y + hy) + fn(x - hx, y - hy)) / (4.0 * hx * hy)
    return fxx, fxy, fyy


@dataclass(frozen=True)
class GradientSpec:
    psi: Diffeo2
    a: float
    b: float

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ValueError("(a, b) must not be (0, 0)")

    def gx(self, x, y):
        return self.b * self.psi.f.dx(x, y) - self.a * self.psi.f.dy(x, y)

    def gy(self, x, y):
        return self.b * self.psi.g.dx(x, y) - self.a * self.psi.g.dy(x, y)

    def curl(self, x, y):
        """∂y(gx) - ∂x(gy) from second differences of f and g."""
        _, fxy, fyy = _second_partials(self.psi.f, x, y)
        gxx, gxy, _ = _second_partials(self.psi.g, x, y)
        return (self.b * fxy - self.a * fyy) - (self.b * gxx - self.a * gxy)


def check_integrability(spec: GradientSpec, domain: Rect, resolution: int) -> float:
    """Max |∂y(h_x) - ∂x(h_y)| over the (resolution+1)² node grid."""
    xs, ys = domain.nodes(resolution)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return float(np.max(np.abs(spec.curl(X, Y))))


@dataclass(frozen=True)
class FirstIntegralGrid:
    """h sampled on a node grid; ``values[i, j]`` is h(xs[i], ys[j])."""

    domain: Rect
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    anchor: tuple
    path_disagreement: float
    integrability_residual: float

    @property
    def resolution(self) -> int:
        return len(self.xs) - 1

    @classmethod
    def from_function(cls, fn, domain: Rect, resolution: int) -> "FirstIntegralGrid":
        """Tabulate a known candidate h, e.g. to test it with :func:`residual_X_of_h`."""
        xs, ys = domain.nodes(resolution)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        values = np.broadcast_to(np.asarray(fn(X, Y), dtype=float), X.shape).copy()
        return cls(domain, xs, ys, values, (0, 0), 0.0, 0.0)

    @cached_property
    def _interpolants(self) -> dict:
        return {
            "linear": RectBivariateSpline(self.xs, self.ys, self.values, kx=1, ky=1, s=0),
            "cubic": RectBivariateSpline(self.xs, self.ys, self.values, kx=3, ky=3, s=0),
        }

    def __call__(self, x, y, method: str = "cubic"):
        """Interpolating spline between nodes; ``method`` is "cubic" or "linear"."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        out = self._interpolants[method].ev(x, y)
        return float(out) if out.ndim == 0 else out

    def gradient(self):
        """Fourth-order central differences on nodes at least two from the border.

        Returns (h_x, h_y, X, Y) for those interior nodes.
        """
        v = self.values
        dx = self.xs[1] - self.xs[0]
        dy = self.ys[1] - self.ys[0]
        hx = (-v[4:, 2:-2] + 8 * v[3:-1, 2:-2] - 8 * v[1:-3, 2:-2] + v[:-4, 2:-2]) / (12 * dx)
        hy = (-v[2:-2, 4:] + 8 * v[2:-2, 3:-1] - 8 * v[2:-2, 1:-3] + v[2:-2, :-4]) / (12 * dy)
        X, Y = np.meshgrid(self.xs[2:-2], self.ys[2:-2], indexing="ij")
        return hx, hy, X, Y


def _nearest_node(xs, ys, point) -> tuple:
    i = int(np.argmin(np.abs(xs - point[0])))
    j = int(np.argmin(np.abs(ys - point[1])))
    return i, j


def build_first_integral(
    spec: GradientSpec,
    domain: Rect,
    resolution: int,
    anchor=None,
    curl_tol: float = CURL_TOL,
) -> FirstIntegralGrid:
    """Integrate the prescribed gradient from ``anchor`` (default: lower-left corner).

    Every node is reached along two axis-aligned paths, x-then-y and
    y-then-x, each integrated by composite Simpson with exact midpoint
    samples. The grid stores their average and the largest disagreement.
    """
    if resolution < 4:
        raise ValueError("resolution must be at least 4")
    residual = check_integrability(spec, domain, resolution)
    if not residual < curl_tol:
        raise IntegrabilityError(f"mixed partials disagree by {residual:.3e} (tolerance {curl_tol:.1e}); no single-valued h")
    xs, ys = domain.nodes(resolution)
    dx, dy = xs[1] - xs[0], ys[1] - ys[0]
    xm, ym = 0.5 * (xs[:-1] + xs[1:]), 0.5 * (ys[:-1] + ys[1:])
    ia, ja = _nearest_node(xs, ys, (domain.x0, domain.y0) if anchor is None else anchor)

    X, Y = np.meshgrid(xs, ys, indexing="ij")
    # gx along every row y = ys[j] (rows indexed by j), gy along every column x = xs[i]
    gx_nodes = spec.gx(X, Y).T
    gx_mids = spec.gx(*np.meshgrid(xm, ys, indexing="ij")).T
    gy_nodes = spec.gy(X, Y)
    gy_mids = spec.gy(*np.meshgrid(xs, ym, indexing="ij"))
    along_x = kernels.cumulative_simpson(gx_nodes, gx_mids, dx, ia).T  # [i, j]: ∫ from xs[ia] to xs[i] at ys[j]
    along_y = kernels.cumulative_simpson(gy_nodes, gy_mids, dy, ja)  # [i, j]: ∫ from ys[ja] to ys[j] at xs[i]

    x_then_y = along_x[:, ja][:, None] + along_y
    y_then_x = along_y[ia, :][None, :] + along_x
    disagreement = float(np.max(np.abs(x_then_y - y_then_x)))
    if disagreement > 10.0 * curl_tol * domain.diameter:
        raise PathDependenceError(f"path integrals disagree by {disagreement:.3e}")
    values = 0.5 * (x_then_y + y_then_x)
    values[ia, ja] = 0.0
    return FirstIntegralGrid(domain, xs, ys, values, (ia, ja), disagreement, residual)


def residual_X_of_h(X: PlaneVectorField, h: FirstIntegralGrid) -> float:
    """max |P h_x + Q h_y| over interior nodes."""
    hx, hy, XX, YY = h.gradient()
    p, q = X(XX, YY)
    return float(np.max(np.abs(p * hx + q * hy)))


@dataclass(frozen=True)
class FlowDrift:
    start: tuple
    end: tuple
    time: float
    drift: float

    @property
    def rate(self) -> float:
        return self.drift / self.time if self.time > 0 else 0.0


def flow_drift(X: PlaneVectorField, h: FirstIntegralGrid, start, duration: float, step: float = RK4_STEP) -> FlowDrift:
    """Follow ẋ = P, ẏ = Q by fixed-step RK4 and compare h at both ends.

    Integration stops early at the last step that stays inside the grid.
    """
    d = h.domain
    z = np.array(start, dtype=float)

    def rhs(z):
        p, q = X(z[0], z[1])
        return np.array([float(p), float(q)])

    def inside(z):
        return d.x0 <= z[0] <= d.x1 and d.y0 <= z[1] <= d.y1

    elapsed = 0.0
    for _ in range(int(round(duration / step))):
        k1 = rhs(z)
        k2 = rhs(z + 0.5 * step * k1)
        k3 = rhs(z + 0.5 * step * k2)
        k4 = rhs(z + step * k3)
        nxt = z + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not inside(nxt):
            break
        z = nxt
        elapsed += step
    drift = abs(h(z[0], z[1]) - h(start[0], start[1]))
    return FlowDrift(tuple(map(float, start)), (float(z[0]), float(z[1])), elapsed, float(drift))
