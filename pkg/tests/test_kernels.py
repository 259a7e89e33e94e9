import os
import subprocess
import sys

import numpy as np
import pytest

from toruswind import kernels

BACKENDS = kernels.backends()


def test_compiled_backend_built():
    # the editable install builds the extension; skip only when it was disabled on purpose
    if os.environ.get("TORUSWIND_NO_EXT") == "1":
        pytest.skip("extension build disabled")
    assert "cython" in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_winding_integral_of_circle(name):
    impl = BACKENDS[name]
    # derivative truncation is about (3h)^4 / 30, negligible at this n
    n = 4096
    t = np.arange(n) * (2 * np.pi / n)
    raw, min_norm = impl.winding_integral(np.cos(3 * t), np.sin(3 * t), 2 * np.pi / n)
    assert raw == pytest.approx(3.0, abs=1e-10)
    assert min_norm == pytest.approx(1.0)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_winding_integral_summation_is_compensated(name):
    # 2**20 terms; an uncompensated running sum is off by ~1e-10 here
    n = 1 << 20
    t = np.arange(n) * (2 * np.pi / n)
    raw, _ = BACKENDS[name].winding_integral(np.cos(100 * t), np.sin(100 * t), 2 * np.pi / n)
    assert raw == pytest.approx(100.0, abs=5e-12)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_winding_integral_rejects_odd_counts(name):
    with pytest.raises(ValueError):
        BACKENDS[name].winding_integral(np.ones(7), np.ones(7), 0.1)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_unwrap_total(name):
    theta = np.angle(np.exp(1j * np.linspace(0, 4 * np.pi, 200)))
    total, jump = BACKENDS[name].unwrap_total(theta)
    assert total == pytest.approx(4 * np.pi, abs=1e-12)
    assert jump < 0.1


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("anchor", [0, 3, 8])
def test_cumulative_simpson_exact_for_cubics(name, anchor):
    x = np.linspace(0.0, 2.0, 9)
    xm = 0.5 * (x[:-1] + x[1:])
    f = lambda s: 4 * s**3 - 3 * s**2 + 1  # noqa: E731
    F = np.stack([f(x), 2 * f(x)])
    M = np.stack([f(xm), 2 * f(xm)])
    out = np.asarray(BACKENDS[name].cumulative_simpson(F, M, x[1] - x[0], anchor))
    prim = x**4 - x**3 + x
    np.testing.assert_allclose(out[0], prim - prim[anchor], atol=1e-12)
    np.testing.assert_allclose(out[1], 2 * (prim - prim[anchor]), atol=1e-12)


def test_backends_agree_on_random_input():
    if len(BACKENDS) < 2:
        pytest.skip("only one backend available")
    rng = np.random.default_rng(3)
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    n = 1024
    t = np.arange(n) * (2 * np.pi / n)
    P = 2 + np.cos(t) + 0.1 * rng.standard_normal(n)
    Q = np.sin(2 * t) + 0.1 * rng.standard_normal(n)
    for a, b in zip(py.winding_integral(P, Q, 2 * np.pi / n), cy.winding_integral(P, Q, 2 * np.pi / n)):
        assert a == pytest.approx(b, abs=1e-12)
    theta = rng.uniform(-np.pi, np.pi, 500)
    for a, b in zip(py.unwrap_total(theta), cy.unwrap_total(theta)):
        assert a == pytest.approx(b, abs=1e-12)
    F = rng.standard_normal((5, 33))
    M = rng.standard_normal((5, 32))
    np.testing.assert_allclose(py.cumulative_simpson(F, M, 0.1, 10), cy.cumulative_simpson(F, M, 0.1, 10), atol=1e-12)


def test_pure_backend_selected_by_environment():
    env = dict(os.environ, TORUSWIND_PURE="1")
    code = "import toruswind, toruswind.uniformization as u; print(toruswind.BACKEND, u.theorem_check(2, 1).snapped)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout.split()
    assert out == ["python", "1"]
