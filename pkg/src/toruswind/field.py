"""Scalar fields, plane vector fields, diffeomorphisms and pushforwards.

All derivatives are central finite differences with step
``fd_step * max(1, |coordinate|)``. Every callable here is vectorized: it
accepts numpy arrays of any (broadcastable) shape.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .expr import evaluate, parse_pair

FD_STEP = 1e-6
EPS_ZERO = 1e-10
EPS_JAC = 1e-12
EPS_INV = 1e-8
NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50


class FieldZeroError(ArithmeticError):
    """The vector field vanishes (or nearly) at a queried point."""


class SingularJacobianError(ArithmeticError):
    pass


class InversionError(ArithmeticError):
    pass


def _central(fn, x, y, axis: int, base: float):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = x if axis == 0 else y
    h = base * np.maximum(1.0, np.abs(c))
    cp = c + h
    cm = c - h
    # divide by the realized step so that linear maps differentiate exactly
    if axis == 0:
        return (fn(cp, y) - fn(cm, y)) / (cp - cm)
    return (fn(x, cp) - fn(x, cm)) / (cp - cm)


@dataclass(frozen=True)
class ScalarField2:
    fn: Callable
    fd_step: float = FD_STEP
    label: str = ""

    def __call__(self, x, y):
        return self.fn(x, y)

    def dx(self, x, y):
        return _central(self.fn, x, y, 0, self.fd_step)

    def dy(self, x, y):
        return _central(self.fn, x, y, 1, self.fd_step)

    @classmethod
    def from_expr(cls, source: str, fd_step: float = FD_STEP) -> "ScalarField2":
        from .expr import parse_expr

        node = parse_expr(source, variables=("x", "y"))
        return cls(lambda x, y: evaluate(node, x, y), fd_step, source)

    @classmethod
    def constant(cls, c: float) -> "ScalarField2":
        return cls(lambda x, y: np.full(np.broadcast_shapes(np.shape(x), np.shape(y)), float(c)) if np.ndim(x) or np.ndim(y) else float(c), label=repr(c))


@dataclass(frozen=True)
class PlaneVectorField:
    """X = P ∂/∂x + Q ∂/∂y.

    ``joint`` optionally evaluates both components in one call; pushforwards
    and the example family use it to avoid computing shared work twice.
    """

    P: ScalarField2
    Q: ScalarField2
    label: str = ""
    joint: Callable | None = None

    def __call__(self, x, y):
        if self.joint is not None:
            return self.joint(x, y)
        return self.P(x, y), self.Q(x, y)

    def norm(self, x, y):
        p, q = self(x, y)
        return np.hypot(p, q)

    def check_regular(self, x, y, eps_zero: float = EPS_ZERO) -> None:
        n = np.min(self.norm(x, y))
        if not n > eps_zero:
            raise FieldZeroError(f"field {self.label!r} vanishes on the queried set (min norm {n:.3e})")

    @classmethod
    def from_functions(cls, fp: Callable, fq: Callable, label: str = "") -> "PlaneVectorField":
        return cls(ScalarField2(fp), ScalarField2(fq), label)

    @classmethod
    def from_joint(cls, joint: Callable, label: str = "") -> "PlaneVectorField":
        return cls(
            ScalarField2(lambda x, y: joint(x, y)[0]),
            ScalarField2(lambda x, y: joint(x, y)[1]),
            label,
            joint,
        )

    @classmethod
    def from_expr(cls, source: str) -> "PlaneVectorField":
        ep, eq = parse_pair(source, variables=("x", "y"))
        return cls(
            ScalarField2(lambda x, y: evaluate(ep, x, y), label=source),
            ScalarField2(lambda x, y: evaluate(eq, x, y), label=source),
            source,
        )

    @classmethod
    def constant(cls, a: float, b: float) -> "PlaneVectorField":
        return cls(ScalarField2.constant(a), ScalarField2.constant(b), f"constant({a!r},{b!r})")


def _xy(x, y):
    """Both coordinates as float arrays of the common broadcast shape."""
    return np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def radial_field() -> PlaneVectorField:
    return PlaneVectorField.from_joint(lambda x, y: _xy(x, y), "radial")


def rotation_field() -> PlaneVectorField:
    def joint(x, y):
        x, y = _xy(x, y)
        return -y, x

    return PlaneVectorField.from_joint(joint, "rotation")


@dataclass(frozen=True)
class Diffeo2:
    """A plane map (x, y) ↦ (f, g) with an optional closed-form inverse.

    Without an inverse, :meth:`inverse_at` solves by damped Newton iteration
    from a seed (default: the target point itself).
    """

    f: ScalarField2
    g: ScalarField2
    inverse: tuple[ScalarField2, ScalarField2] | None = None
    source: str = "plane"
    target: str = "plane"
    label: str = ""

    def __call__(self, x, y):
        return self.f(x, y), self.g(x, y)

    def jacobian(self, x, y) -> np.ndarray:
        """Array of shape (..., 2, 2) holding [[f_x, f_y], [g_x, g_y]]."""
        row_f = np.stack(np.broadcast_arrays(self.f.dx(x, y), self.f.dy(x, y)), axis=-1)
        row_g = np.stack(np.broadcast_arrays(self.g.dx(x, y), self.g.dy(x, y)), axis=-1)
        return np.stack([row_f, row_g], axis=-2)

    def jacobian_det(self, x, y):
        J = self.jacobian(x, y)
        return J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]

    def inverse_at(self, u, v, seed=None):
        if self.inverse is not None:
            fi, gi = self.inverse
            return fi(u, v), gi(u, v)
        return newton_inverse(self, u, v, seed)

    def compose(self, inner: "Diffeo2") -> "Diffeo2":
        """``self ∘ inner``."""
        outer = self

        def fx(x, y):
            return outer.f(*inner(x, y))

        def gx(x, y):
            return outer.g(*inner(x, y))

        inverse = None
        if outer.inverse is not None and inner.inverse is not None:
            inverse = (
                ScalarField2(lambda u, v: inner.inverse[0](*outer.inverse_at(u, v))),
                ScalarField2(lambda u, v: inner.inverse[1](*outer.inverse_at(u, v))),
            )
        return Diffeo2(ScalarField2(fx, self.f.fd_step), ScalarField2(gx, self.g.fd_step), inverse, inner.source, outer.target, f"{outer.label}∘{inner.label}")

    @classmethod
    def from_expr(cls, source: str, inverse: str | None = None) -> "Diffeo2":
        ef, eg = parse_pair(source, variables=("x", "y"))
        inv = None
        if inverse is not None:
            ei, ej = parse_pair(inverse, variables=("x", "y"))
            inv = (ScalarField2(lambda x, y: evaluate(ei, x, y)), ScalarField2(lambda x, y: evaluate(ej, x, y)))
        return cls(
            ScalarField2(lambda x, y: evaluate(ef, x, y), label=source),
            ScalarField2(lambda x, y: evaluate(eg, x, y), label=source),
            inv,
            label=source,
        )

    @classmethod
    def identity(cls) -> "Diffeo2":
        ident = (ScalarField2(lambda x, y: _xy(x, y)[0]), ScalarField2(lambda x, y: _xy(x, y)[1]))
        return cls(ident[0], ident[1], ident, label="identity")


def jacobian(d: Diffeo2, point) -> np.ndarray:
    """2×2 central-difference Jacobian of ``d`` at one point."""
    x, y = point
    return d.jacobian(float(x), float(y))


def newton_inverse(d: Diffeo2, u, v, seed=None, tol: float = NEWTON_TOL, maxiter: int = NEWTON_MAXITER):
    """Solve d(x, y) = (u, v) pointwise by damped Newton iteration.

    ``seed`` is an initial guess pair, or a callable mapping (u, v) to one.
    """
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    scalar = u.ndim == 0
    u = np.atleast_1d(u).astype(float)
    v = np.atleast_1d(v).astype(float)
    if seed is None:
        x, y = u.copy(), v.copy()
    elif callable(seed):
        x, y = (np.broadcast_to(np.asarray(c, dtype=float), u.shape).copy() for c in seed(u, v))
    else:
        x, y = (np.broadcast_to(np.asarray(c, dtype=float), u.shape).copy() for c in seed)
    scale = np.maximum(1.0, np.hypot(u, v))

    def residual(x, y):
        fx, gx = d(x, y)
        return np.asarray(fx) - u, np.asarray(gx) - v

    ru, rv = residual(x, y)
    err = np.hypot(ru, rv)
    for _ in range(maxiter):
        if np.all(err <= tol * scale):
            break
        J = d.jacobian(x, y)
        det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
        if np.any(np.abs(det) <= EPS_JAC):
            raise SingularJacobianError("singular Jacobian during Newton inversion")
        sx = (J[..., 1, 1] * ru - J[..., 0, 1] * rv) / det
        sy = (-J[..., 1, 0] * ru + J[..., 0, 0] * rv) / det
        lam = np.ones_like(x)
        active = err > tol * scale
        for _ in range(30):
            tx = np.where(active, x - lam * sx, x)
            ty = np.where(active, y - lam * sy, y)
            tu, tv = residual(tx, ty)
            terr = np.hypot(tu, tv)
            worse = active & ~(terr < err) & (lam > 1e-9)
            if not np.any(worse):
                break
            lam = np.where(worse, lam * 0.5, lam)
        x, y, ru, rv, err = tx, ty, tu, tv, terr
    if not np.all(err <= tol * scale):
        raise InversionError(f"Newton inversion did not converge (residual {err.max():.3e})")
    if scalar:
        return float(x[0]), float(y[0])
    return x, y


def pushforward(X: PlaneVectorField, d: Diffeo2, seed=None) -> PlaneVectorField:
    """The field Y(w) = J_d(d⁻¹(w)) · X(d⁻¹(w)), evaluated lazily."""

    def joint(u, v):
        x, y = d.inverse_at(u, v, seed)
        J = d.jacobian(x, y)
        det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
        if np.any(np.abs(det) <= EPS_JAC):
            raise SingularJacobianError("singular Jacobian in pushforward")
        p, q = X(x, y)
        return J[..., 0, 0] * p + J[..., 0, 1] * q, J[..., 1, 0] * p + J[..., 1, 1] * q

    return PlaneVectorField.from_joint(joint, f"push({X.label}, {d.label})")


def conjugacy_residual(X: PlaneVectorField, Z: PlaneVectorField, d: Diffeo2, samples) -> float:
    """max over samples s of |J_d(s) X(s) - Z(d(s))|."""
    samples = np.asarray(samples, dtype=float).reshape(-1, 2)
    x, y = samples[:, 0], samples[:, 1]
    J = d.jacobian(x, y)
    p, q = X(x, y)
    zu, zv = Z(*d(x, y))
    ru = J[:, 0, 0] * p + J[:, 0, 1] * q - zu
    rv = J[:, 1, 0] * p + J[:, 1, 1] * q - zv
    return float(np.max(np.hypot(ru, rv)))


def example_field(psi: Diffeo2, a: float, b: float) -> PlaneVectorField:
    """The field that ψ = (f, g) carries to the constant field (a, b).

    P = (a g_y - b f_y) / J and Q = (b f_x - a g_x) / J with
    J = f_x g_y - f_y g_x.
    """
    if a == 0 and b == 0:
        raise ValueError("(a, b) must not be (0, 0)")

    def joint(x, y):
        J = psi.jacobian(x, y)
        fx, fy, gx, gy = J[..., 0, 0], J[..., 0, 1], J[..., 1, 0], J[..., 1, 1]
        det = fx * gy - fy * gx
        if np.any(np.abs(det) <= EPS_JAC):
            raise SingularJacobianError(f"Jacobian of {psi.label!r} vanishes")
        return (a * gy - b * fy) / det, (b * fx - a * gx) / det

    return PlaneVectorField.from_joint(joint, f"example({psi.label}, {a!r}, {b!r})")


# Registry -------------------------------------------------------------------


def split_args(text: str) -> list[str]:
    """Split on commas that are not nested inside parentheses."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i].strip())
            start = i + 1
    parts.append(text[start:].strip())
    return parts


_CALL_RE = re.compile(r"^\s*([a-z][a-z\-]*)\s*(?:\((.*)\))?\s*$", re.S)
REGISTRY = ("constant(a,b)", "radial", "rotation", "example(psi,a,b)", "theorem-pushforward(p,q)")


def map_from_spec(text: str) -> Diffeo2:
    """A map from ``"identity"``, ``"phi(p,q)"`` or a pair expression."""
    s = text.strip()
    if s == "identity":
        return Diffeo2.identity()
    m = _CALL_RE.match(s)
    if m and m.group(1) == "phi":
        from .uniformization import phi_map

        p, q = (int(v) for v in split_args(m.group(2)))
        return phi_map(p, q)
    return Diffeo2.from_expr(s)


def field_from_spec(text: str) -> PlaneVectorField:
    """Build a field from a registry name or a pair expression ``"(P, Q)"``."""
    s = text.strip()
    m = _CALL_RE.match(s)
    if m and not s.startswith("("):
        name, inner = m.group(1), m.group(2)
        if name == "radial" and inner is None:
            return radial_field()
        if name == "rotation" and inner is None:
            return rotation_field()
        if name == "constant" and inner is not None:
            a, b = (float(v) for v in split_args(inner))
            return PlaneVectorField.constant(a, b)
        if name == "example" and inner is not None:
            psi_src, a, b = split_args(inner)
            return example_field(map_from_spec(psi_src), float(a), float(b))
        if name == "theorem-pushforward" and inner is not None:
            from .uniformization import theorem_field

            p, q = (int(v) for v in split_args(inner))
            return theorem_field(p, q)
        raise ValueError(f"unknown field {s!r}; registry: {', '.join(REGISTRY)} or a pair expression")
    return PlaneVectorField.from_expr(s)
