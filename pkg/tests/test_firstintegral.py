import numpy as np
import pytest

from toruswind.field import Diffeo2, PlaneVectorField, example_field
from toruswind.firstintegral import (
    FirstIntegralGrid,
    GradientSpec,
    IntegrabilityError,
    Rect,
    build_first_integral,
    check_integrability,
    flow_drift,
    residual_X_of_h,
    torus_first_integral,
)

UNIT = Rect(0.0, 1.0, 0.0, 1.0)
# ψ = ∇(eˣ cos y); its gradient system integrates to h = eˣ (b cos y + a sin y)
EXP_MAP = "(exp(x)*cos(y), -exp(x)*sin(y))"


def exp_oracle(a, b, x, y):
    return np.exp(x) * (b * np.cos(y) + a * np.sin(y))


def anchored(values):
    return values - values[0, 0]


def test_torus_first_integral_is_conserved():
    for a, b in [(1.0, 2.0), (-3.0, 0.5), (0.0, 1.0)]:
        H = torus_first_integral(a, b)
        u, v = np.meshgrid(np.linspace(0, 6, 7), np.linspace(0, 6, 7))
        for s in (0.3, -2.0, 10.0):
            # constant along the straight flow lines of a ∂u + b ∂v
            np.testing.assert_allclose(H(u + a * s, v + b * s), H(u, v), atol=1e-12)
        assert np.max(np.abs(a * H.dx(u, v) + b * H.dy(u, v))) < 1e-8
    with pytest.raises(ValueError):
        torus_first_integral(0.0, 0.0)


def test_identity_map_gives_linear_integral():
    h = build_first_integral(GradientSpec(Diffeo2.identity(), 1.0, 2.0), UNIT, 16)
    X, Y = np.meshgrid(h.xs, h.ys, indexing="ij")
    np.testing.assert_allclose(h.values, 2 * X - Y, atol=1e-10)


def test_scaling_map():
    h = build_first_integral(GradientSpec(Diffeo2.from_expr("(2*x, y)"), 2.0, 3.0), UNIT, 8)
    X, Y = np.meshgrid(h.xs, h.ys, indexing="ij")
    np.testing.assert_allclose(h.values, 6 * X - 2 * Y, atol=1e-9)


def test_integrability_residuals():
    assert check_integrability(GradientSpec(Diffeo2.identity(), 1.0, 2.0), UNIT, 8) < 1e-9
    assert check_integrability(GradientSpec(Diffeo2.from_expr(EXP_MAP), 1.0, 2.0), UNIT, 8) < 1e-5
    skew = GradientSpec(Diffeo2.from_expr("(x + 0.1*sin(y), y + 0.1*sin(x))"), 1.0, 2.0)
    assert check_integrability(skew, UNIT, 8) > 1e-2


def test_non_integrable_system_refused():
    skew = GradientSpec(Diffeo2.from_expr("(x + 0.1*sin(y), y + 0.1*sin(x))"), 1.0, 2.0)
    with pytest.raises(IntegrabilityError):
        build_first_integral(skew, UNIT, 16)


@pytest.mark.parametrize("a, b", [(1.0, 2.0), (-0.5, 1.0)])
def test_exponential_map_against_closed_form(a, b):
    domain = Rect(0.0, 1.0, -0.5, 0.5)
    h = build_first_integral(GradientSpec(Diffeo2.from_expr(EXP_MAP), a, b), domain, 64)
    X, Y = np.meshgrid(h.xs, h.ys, indexing="ij")
    np.testing.assert_allclose(anchored(h.values), anchored(exp_oracle(a, b, X, Y)), atol=1e-8)
    assert h.path_disagreement < 1e-8


def test_simpson_order():
    domain = Rect(0.0, 2.0, 0.0, 2.0)
    spec = GradientSpec(Diffeo2.from_expr(EXP_MAP), 1.0, 2.0)
    errors = []
    for res in (4, 8, 16, 32):
        h = build_first_integral(spec, domain, res)
        X, Y = np.meshgrid(h.xs, h.ys, indexing="ij")
        errors.append(np.max(np.abs(anchored(h.values) - anchored(exp_oracle(1.0, 2.0, X, Y)))))
    ratios = [errors[k] / errors[k + 1] for k in range(len(errors) - 1)]
    assert min(ratios) >= 8, (errors, ratios)


def test_anchor_shift_changes_only_a_constant():
    spec = GradientSpec(Diffeo2.from_expr(EXP_MAP), 1.0, 2.0)
    first = build_first_integral(spec, UNIT, 64)
    second = build_first_integral(spec, UNIT, 64, anchor=(0.7, 0.3))
    diff = first.values - second.values
    assert np.ptp(diff) < 1e-8
    assert second.values[second.anchor] == 0.0


def test_generated_field_is_conserved():
    psi = Diffeo2.from_expr(EXP_MAP)
    h = build_first_integral(GradientSpec(psi, 1.0, 2.0), UNIT, 128)
    X = example_field(psi, 1.0, 2.0)
    assert residual_X_of_h(X, h) < 1e-4
    drift = flow_drift(X, h, (0.5, 0.5), 1.0)
    assert drift.time > 0
    assert drift.rate < 1e-4


def test_non_gradient_map_passes_check_but_fails_conservation():
    # ψ = (xy, y) makes the prescribed system curl-free, yet X(h) = -x/y
    psi = Diffeo2.from_expr("(x*y, y)")
    domain = Rect(0.5, 1.5, 0.5, 1.5)
    spec = GradientSpec(psi, 1.0, 0.0)
    assert check_integrability(spec, domain, 16) < 1e-6
    h = build_first_integral(spec, domain, 64)
    X = example_field(psi, 1.0, 0.0)
    hx, hy, XX, YY = h.gradient()
    p, q = X(XX, YY)
    np.testing.assert_allclose(p * hx + q * hy, -XX / YY, atol=1e-6)
    assert residual_X_of_h(X, h) > 1.0


def test_wrong_candidate_detected():
    h = FirstIntegralGrid.from_function(lambda x, y: x, UNIT, 32)
    assert residual_X_of_h(PlaneVectorField.constant(1.0, 0.0), h) == pytest.approx(1.0, abs=1e-12)
    assert residual_X_of_h(PlaneVectorField.constant(0.0, 1.0), h) < 1e-12


def test_interpolation_between_nodes():
    h = FirstIntegralGrid.from_function(lambda x, y: 3 * x - 2 * y + 1, UNIT, 8)
    for method in ("cubic", "linear"):
        assert h(0.123, 0.456, method) == pytest.approx(3 * 0.123 - 2 * 0.456 + 1, abs=1e-12)
    smooth = FirstIntegralGrid.from_function(lambda x, y: np.sin(x) * np.cos(y), UNIT, 32)
    assert smooth(0.31, 0.77) == pytest.approx(np.sin(0.31) * np.cos(0.77), abs=1e-6)


def test_flow_stops_at_domain_edge():
    h = FirstIntegralGrid.from_function(lambda x, y: y, UNIT, 16)
    drift = flow_drift(PlaneVectorField.constant(1.0, 0.0), h, (0.5, 0.5), 5.0)
    assert drift.time == pytest.approx(0.5, abs=2e-3)
    assert drift.drift < 1e-12


def test_rect_parsing():
    assert Rect.parse("0,1,2,3") == Rect(0.0, 1.0, 2.0, 3.0)
    with pytest.raises(ValueError):
        Rect.parse("0,1,2")
    with pytest.raises(ValueError):
        Rect.parse("1,0,0,1")


def test_resolution_floor():
    with pytest.raises(ValueError):
        build_first_integral(GradientSpec(Diffeo2.identity(), 1.0, 2.0), UNIT, 2)
