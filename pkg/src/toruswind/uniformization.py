"""Uniformization of a constant torus field onto a planar corona.

For a curve type (p, q) ≠ (0, 0), with H = p² + q²::

    Γ(t)  = (p t, q t)                   (a lift of a type (p, q) torus curve)
    Γ₀(t) = (p t + 1/2, q t + 1/2)
    φ(x, y) = (1/H) (p y - q x + 2π) (cos(p x + q y), sin(p x + q y))

φ sends the lift of Γ onto the circle of radius 2π/H and the constant field
∂/∂x to a field whose index along that circle is 1.

Everything here works on lift coordinates (real plane); wrapping to the
torus is left to :mod:`toruswind.geometry`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .field import Diffeo2, PlaneVectorField, ScalarField2, pushforward
from .geometry import TWO_PI, ParamCurve, curve_distance, line_curve
from .index import IndexResult, quadrature_from_sampler, unwrap_from_sampler

ORACLE_TOL = 1e-6

THEOREM_SWEEP = ((1, 0), (0, 1), (1, 1), (-1, 1), (2, 1), (1, 2), (3, 2), (2, 3))


class StripError(ValueError):
    """A point lies where p y - q x + 2π <= 0, outside the strip φ covers."""


class TheoremCheckError(ArithmeticError):
    pass


def _require_type(p: int, q: int) -> int:
    if int(p) != p or int(q) != q:
        raise ValueError(f"curve type must be integral, got ({p}, {q})")
    if p == 0 and q == 0:
        raise ValueError("curve type (0, 0) is not allowed")
    return int(p) ** 2 + int(q) ** 2


def rho(p: int, q: int, point):
    """The linear map (1/(p²+q²)) [[p, q], [-q, p]]."""
    H = _require_type(p, q)
    x, y = (np.asarray(c, dtype=float) for c in point)
    return (p * x + q * y) / H, (-q * x + p * y) / H


def tau(point):
    x, y = (np.asarray(c, dtype=float) for c in point)
    return x, y + TWO_PI


def tau_inv(point):
    x, y = (np.asarray(c, dtype=float) for c in point)
    return x, y - TWO_PI


def sigma(point):
    """Polar-style map (x, y) ↦ (y cos x, y sin x); x is the angle."""
    x, y = (np.asarray(c, dtype=float) for c in point)
    return y * np.cos(x), y * np.sin(x)


def phi(p: int, q: int, point):
    """Closed form of φ on lift coordinates.

    Raises :class:`StripError` where the radius factor p y - q x + 2π is not
    positive.
    """
    H = _require_type(p, q)
    x, y = (np.asarray(c, dtype=float) for c in point)
    radius = p * y - q * x + TWO_PI
    if np.any(radius <= 0):
        raise StripError("point outside the strip p*y - q*x + 2*pi > 0")
    angle = p * x + q * y
    return radius * np.cos(angle) / H, radius * np.sin(angle) / H


def phi_composed(p: int, q: int, point):
    """φ rebuilt from its factors: (1/H) · σ ∘ τ ∘ (H ρ)."""
    H = _require_type(p, q)
    u, w = rho(p, q, point)
    a, b = sigma(tau((H * u, H * w)))
    return a / H, b / H


def phi_inverse(p: int, q: int, point):
    """Principal-branch inverse of φ (angle p x + q y taken in (-π, π])."""
    H = _require_type(p, q)
    a, b = (np.asarray(c, dtype=float) for c in point)
    angle = np.arctan2(b, a)
    w = H * np.hypot(a, b) - TWO_PI
    return (p * angle - q * w) / H, (q * angle + p * w) / H


def phi_map(p: int, q: int) -> Diffeo2:
    """φ as a :class:`Diffeo2` carrying its closed-form inverse."""
    _require_type(p, q)
    label = f"phi({p},{q})"
    return Diffeo2(
        ScalarField2(lambda x, y: phi(p, q, (x, y))[0], label=label),
        ScalarField2(lambda x, y: phi(p, q, (x, y))[1], label=label),
        (
            ScalarField2(lambda u, v: phi_inverse(p, q, (u, v))[0]),
            ScalarField2(lambda u, v: phi_inverse(p, q, (u, v))[1]),
        ),
        source="torus",
        target="plane",
        label=label,
    )


def theorem_field(p: int, q: int) -> PlaneVectorField:
    """dφ ∘ ∂/∂x ∘ φ⁻¹ on the plane.

    Single-valued although φ⁻¹ picks a branch: ∂φ/∂x depends on the lift
    only through the image point.
    """
    field_ = pushforward(PlaneVectorField.constant(1.0, 0.0), phi_map(p, q))
    return PlaneVectorField(field_.P, field_.Q, f"theorem-pushforward({p},{q})", field_.joint)


def image_curve(p: int, q: int, sample_count: int = 4096) -> ParamCurve:
    """φ∘Γ traced once: t ↦ φ(Γ(t/H))."""
    H = _require_type(p, q)
    return ParamCurve(
        x=lambda t: phi(p, q, (p * np.asarray(t) / H, q * np.asarray(t) / H))[0],
        y=lambda t: phi(p, q, (p * np.asarray(t) / H, q * np.asarray(t) / H))[1],
        target="plane",
        sample_count=sample_count,
        label=f"phi({p},{q})∘Gamma",
    )


@dataclass(frozen=True)
class TorusUniformization:
    """The curves and map attached to a type (p, q).

    ``gamma0_nominal`` is always (p t + 1/2, q t + 1/2). It coincides with Γ on
    the torus when p = q; then ``gamma0`` is the half-period translate
    (offset π(-q, p)/H) and ``gamma0_fallback`` is set.
    """

    p: int
    q: int
    H: int
    gamma: ParamCurve
    gamma0_nominal: ParamCurve
    gamma0: ParamCurve
    gamma0_offset: tuple
    gamma0_fallback: bool
    distance_nominal: float
    distance: float
    phi: Diffeo2 = field(repr=False)

    @classmethod
    def build(cls, p: int, q: int, sample_count: int = 4096) -> "TorusUniformization":
        H = _require_type(p, q)
        gamma = line_curve(p, q, (0.0, 0.0), "torus", sample_count)
        nominal_offset = (0.5, 0.5)
        gamma0_nominal = line_curve(p, q, nominal_offset, "torus", sample_count)
        dist_nominal = curve_distance(gamma, gamma0_nominal)
        # coincident curves still show a sampled gap up to about one spacing
        spacing = TWO_PI * math.sqrt(H) / sample_count
        if dist_nominal > 2.0 * spacing:
            gamma0, offset, fallback, dist = gamma0_nominal, nominal_offset, False, dist_nominal
        else:
            offset = (-math.pi * q / H, math.pi * p / H)
            gamma0 = line_curve(p, q, offset, "torus", sample_count)
            fallback = True
            dist = curve_distance(gamma, gamma0)
        return cls(p, q, H, gamma, gamma0_nominal, gamma0, offset, fallback, dist_nominal, dist, phi_map(p, q))

    @property
    def gamma0_level(self) -> float:
        """Value of p y - q x on the working Γ₀."""
        ox, oy = self.gamma0_offset
        return self.p * oy - self.q * ox


@dataclass(frozen=True)
class TheoremCheck:
    p: int
    q: int
    quadrature: IndexResult
    unwrap: IndexResult
    oracle_delta: float
    covering_multiplicity: int
    full_parametrization_raw: float
    image_error: float

    @property
    def snapped(self) -> int:
        return self.quadrature.snapped

    @property
    def snap_residual(self) -> float:
        return self.quadrature.snap_residual

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "snapped": self.snapped,
            "snap_residual": self.snap_residual,
            "oracle_delta": self.oracle_delta,
            "quadrature": self.quadrature.as_dict(),
            "unwrap": self.unwrap.as_dict(),
            "covering_multiplicity": self.covering_multiplicity,
            "full_parametrization_raw": self.full_parametrization_raw,
            "image_error": self.image_error,
        }


def _dphi_dx(p: int, q: int):
    return phi_map(p, q).f.dx, phi_map(p, q).g.dx


def theorem_check(p: int, q: int, oracle_tol: float = ORACLE_TOL) -> TheoremCheck:
    """Index of dφ∘Z∘φ⁻¹ along φ∘Γ for Z = ∂/∂x.

    Along the image curve the field equals ∂φ/∂x evaluated on Γ, taken here
    by central differences of φ. The index is computed on the Jordan curve
    φ∘Γ traced once, t ↦ φ(Γ(t/H)); over the full parameter range
    t ∈ [0, 2π] the curve covers its circle H times and the same integral
    returns H, reported as ``full_parametrization_raw``.
    """
    H = _require_type(p, q)
    fx, gx = _dphi_dx(p, q)

    def along_image(t):
        x, y = p * t / H, q * t / H
        return fx(x, y), gx(x, y)

    def along_full(t):
        x, y = p * t, q * t
        return fx(x, y), gx(x, y)

    quad = quadrature_from_sampler(along_image)
    unwrap = unwrap_from_sampler(along_image)
    delta = abs(quad.raw - unwrap.raw)
    if delta >= oracle_tol:
        raise TheoremCheckError(f"quadrature and unwrap disagree by {delta:.3e} for ({p}, {q})")
    full = quadrature_from_sampler(along_full)

    t = np.linspace(0.0, TWO_PI, 4097)
    ax, ay = phi(p, q, (p * t, q * t))
    err = float(np.max(np.hypot(ax - TWO_PI / H * np.cos(H * t), ay - TWO_PI / H * np.sin(H * t))))
    return TheoremCheck(p, q, quad, unwrap, delta, H, full.raw, err)


def theorem_sweep(cases=THEOREM_SWEEP) -> list[TheoremCheck]:
    return [theorem_check(p, q) for p, q in cases]


@dataclass(frozen=True)
class CoronaReport:
    p: int
    q: int
    rmin: float
    rmax: float
    strip: tuple
    gamma_radius: float
    gamma_radius_spread: float
    gamma0_radius: float
    gamma0_radius_spread: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def corona_image_check(p: int, q: int, grid: int = 64) -> CoronaReport:
    """Radii of φ over the strip cut out by consecutive lifts of Γ₀.

    In rotated coordinates u = p x + q y, w = p y - q x the lifts of Γ are
    lines w ∈ 2πgZ (g = gcd(p, q)) and those of Γ₀ are w ∈ w₀ + 2πgZ. The
    sampled strip is the one between two Γ₀ lifts that contains Γ.
    """
    uni = TorusUniformization.build(p, q)
    H = uni.H
    g = math.gcd(p, q)
    period = TWO_PI * g
    w0 = uni.gamma0_level
    lo = w0 - period * math.ceil(w0 / period)
    if lo > 0:
        lo -= period
    hi = lo + period
    u, w = np.meshgrid(np.linspace(0.0, TWO_PI, grid + 1), np.linspace(lo, hi, grid + 1), indexing="ij")
    x = (p * u - q * w) / H
    y = (q * u + p * w) / H
    radius_factor = p * y - q * x + TWO_PI
    if np.any(radius_factor <= 0):
        raise StripError(f"nonpositive radius on the strip for ({p}, {q})")
    r = np.hypot(*phi(p, q, (x, y)))

    t = np.linspace(0.0, TWO_PI, grid + 1)
    rg = np.hypot(*phi(p, q, uni.gamma(t)))
    r0 = np.hypot(*phi(p, q, uni.gamma0(t)))
    return CoronaReport(
        p,
        q,
        float(r.min()),
        float(r.max()),
        (float(lo), float(hi)),
        float(rg.mean()),
        float(np.ptp(rg)),
        float(r0.mean()),
        float(np.ptp(r0)),
    )
