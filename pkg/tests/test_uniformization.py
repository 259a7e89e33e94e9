import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toruswind.geometry import TWO_PI, curve_type
from toruswind.index import index_both
from toruswind.uniformization import (
    THEOREM_SWEEP,
    StripError,
    TorusUniformization,
    corona_image_check,
    image_curve,
    phi,
    phi_composed,
    phi_inverse,
    rho,
    sigma,
    tau,
    tau_inv,
    theorem_check,
    theorem_field,
)


def dphi_dx_oracle(p, q, x, y):
    """∂φ/∂x written out by hand from φ = (R/H)(cos A, sin A)."""
    H = p * p + q * q
    A = p * x + q * y
    R = p * y - q * x + TWO_PI
    return (-q * np.cos(A) - p * R * np.sin(A)) / H, (-q * np.sin(A) + p * R * np.cos(A)) / H


@pytest.mark.parametrize(
    "p, q, point, expected",
    [
        (1, 0, (3.0, -2.0), (3.0, -2.0)),
        (0, 1, (3.0, -2.0), (-2.0, -3.0)),
        (2, 1, (5.0, 0.0), (2.0, -1.0)),
        (1, 1, (1.0, 1.0), (1.0, 0.0)),
    ],
)
def test_rho_examples(p, q, point, expected):
    assert rho(p, q, point) == pytest.approx(expected, abs=1e-15)


def test_tau_and_sigma():
    assert tau((1.0, 2.0)) == pytest.approx((1.0, 2.0 + TWO_PI))
    assert tau_inv(tau((1.0, 2.0))) == pytest.approx((1.0, 2.0))
    assert sigma((math.pi / 2, 2.0)) == pytest.approx((0.0, 2.0), abs=1e-15)
    assert sigma((0.0, 3.0)) == pytest.approx((3.0, 0.0))


@pytest.mark.parametrize("p, q", THEOREM_SWEEP)
def test_phi_at_origin(p, q):
    H = p * p + q * q
    assert phi(p, q, (0.0, 0.0)) == pytest.approx((TWO_PI / H, 0.0), abs=1e-15)


@settings(max_examples=200)
@given(st.sampled_from(THEOREM_SWEEP), st.floats(-10, 10), st.floats(-10, 10))
def test_composition_matches_closed_form(pq, x, y):
    p, q = pq
    if p * y - q * x + TWO_PI <= 0.01:
        return
    np.testing.assert_allclose(phi_composed(p, q, (x, y)), phi(p, q, (x, y)), atol=1e-9, rtol=1e-12)


def test_naive_composition_differs_when_scaled():
    # with the 1/H factor inside ρ, σ∘τ∘ρ is not φ once H > 1
    p, q, point = 2, 1, (0.3, 0.4)
    naive = sigma(tau(rho(p, q, point)))
    assert np.hypot(*(np.array(naive) - np.array(phi(p, q, point)))) > 0.1
    # for H = 1 the factors agree
    assert sigma(tau(rho(1, 0, point))) == pytest.approx(phi(1, 0, point))


@settings(max_examples=100)
@given(st.sampled_from(THEOREM_SWEEP), st.floats(-math.pi + 1e-3, math.pi - 1e-3), st.floats(0.1, 5.0))
def test_phi_inverse_round_trip(pq, angle, radius):
    p, q = pq
    w = (radius * math.cos(angle), radius * math.sin(angle))
    np.testing.assert_allclose(phi(p, q, phi_inverse(p, q, w)), w, atol=1e-12)


def test_strip_enforced():
    with pytest.raises(StripError):
        phi(1, 0, (0.0, -TWO_PI))


@pytest.mark.parametrize("p, q", [(0, 0), (1.5, 0)])
def test_invalid_types(p, q):
    with pytest.raises(ValueError):
        rho(p, q, (0.0, 0.0))


@pytest.mark.parametrize("p, q", THEOREM_SWEEP)
def test_image_of_gamma_is_circle(p, q):
    H = p * p + q * q
    t = np.linspace(0.0, TWO_PI, 1001)
    a, b = phi(p, q, (p * t, q * t))
    assert np.max(np.hypot(a - TWO_PI / H * np.cos(H * t), b - TWO_PI / H * np.sin(H * t))) < 1e-9


@pytest.mark.parametrize("p, q", THEOREM_SWEEP)
def test_theorem_check(p, q):
    res = theorem_check(p, q)
    assert res.snapped == 1
    assert res.snap_residual < 1e-6
    assert res.oracle_delta < 1e-6
    assert res.covering_multiplicity == p * p + q * q
    assert res.full_parametrization_raw == pytest.approx(p * p + q * q, abs=1e-6)
    assert res.image_error < 1e-9


@pytest.mark.parametrize("p, q", [(1, 0), (2, 1), (-1, 1)])
def test_pushforward_field_matches_analytic_derivative(p, q):
    H = p * p + q * q
    t = np.linspace(0.0, TWO_PI, 50, endpoint=False) / H
    x, y = p * t, q * t
    u, v = phi(p, q, (x, y))
    got = np.array(theorem_field(p, q)(u, v))
    np.testing.assert_allclose(got, np.array(dphi_dx_oracle(p, q, x, y)), atol=1e-6)


@pytest.mark.parametrize("p, q", [(1, 0), (1, 1), (2, 1)])
def test_registry_field_index_along_image(p, q):
    quad, unwrap, delta = index_both(theorem_field(p, q), image_curve(p, q, sample_count=1024))
    assert quad.snapped == 1 and unwrap.snapped == 1 and delta < 1e-6


@pytest.mark.parametrize("p, q", THEOREM_SWEEP)
def test_uniformization_curves(p, q):
    uni = TorusUniformization.build(p, q)
    assert (curve_type(uni.gamma).p, curve_type(uni.gamma).q) == (p, q)
    ct0 = curve_type(uni.gamma0)
    assert (ct0.p, ct0.q) == (p, q)
    assert uni.distance > 0.1
    assert uni.gamma0_fallback == (p == q)


def test_offset_lines_half_unit_apart():
    uni = TorusUniformization.build(1, 0)
    assert uni.distance == pytest.approx(0.5, abs=1e-6)
    assert uni.gamma0_level == pytest.approx(0.5)


def test_coincident_translate_replaced():
    uni = TorusUniformization.build(1, 1)
    assert uni.distance_nominal < 1e-2
    assert uni.gamma0_level == pytest.approx(math.pi)
    assert uni.distance == pytest.approx(math.pi / math.sqrt(2), abs=1e-3)


@pytest.mark.parametrize("p, q", THEOREM_SWEEP)
def test_corona(p, q):
    H = p * p + q * q
    rep = corona_image_check(p, q)
    assert 0 < rep.rmin <= rep.gamma_radius <= rep.rmax
    assert rep.gamma_radius == pytest.approx(TWO_PI / H, abs=1e-12)
    assert rep.gamma_radius_spread < 1e-12
    assert rep.gamma0_radius_spread < 1e-12
    level = TorusUniformization.build(p, q).gamma0_level
    assert rep.gamma0_radius == pytest.approx((level + TWO_PI) / H, abs=1e-12)
    lo, hi = rep.strip
    assert lo <= 0 <= hi
