import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toruswind.expr import (
    Binary,
    Call,
    Const,
    DomainError,
    ExprSyntaxError,
    Num,
    Pow,
    Unary,
    UnknownIdentifierError,
    Var,
    eval_expr,
    evaluate,
    parse_expr,
    parse_pair,
    to_source,
)


def test_identity_variable():
    assert eval_expr(parse_expr("x"), (3, 0)) == 3


@pytest.mark.parametrize("x", [-7.3, 0.0, 0.5, 2.0, 1e3])
def test_pythagorean_identity(x):
    assert eval_expr(parse_expr("sin(x)^2 + cos(x)^2"), (x, 1.0)) == pytest.approx(1.0, abs=1e-12)


def test_unknown_identifier_is_named():
    with pytest.raises(UnknownIdentifierError) as info:
        parse_expr("(a*sin(x))")
    assert info.value.name == "a"
    assert info.value.position == 1


def test_product():
    assert eval_expr(parse_expr("x*y"), (2, 5)) == 10


def test_division_by_zero_is_domain_error():
    with pytest.raises(DomainError) as info:
        eval_expr(parse_expr("1/x"), (0, 1))
    assert "1.0 / x" in str(info.value)
    assert isinstance(info.value.node, Binary)


def test_atan2_axis():
    assert eval_expr(parse_expr("atan2(y,x)"), (0, 1)) == pytest.approx(math.pi / 2, abs=1e-12)


@pytest.mark.parametrize(
    "source, point, expected",
    [
        ("-x^2", (3, 0), -9.0),
        ("2^3^2", (0, 0), 512.0),
        ("2*3+4", (0, 0), 10.0),
        ("2+3*4", (0, 0), 14.0),
        ("(2+3)*4", (0, 0), 20.0),
        ("8/4/2", (0, 0), 1.0),
        ("8-4-2", (0, 0), 2.0),
        ("x**2 - -y", (2, 1), 5.0),
        ("x^-1", (4, 0), 0.25),
        ("2^(1/2)", (0, 0), math.sqrt(2)),
        ("pi", (0, 0), math.pi),
        ("abs(-x) + exp(0) + log(1) + sqrt(4) + tan(0)", (2, 0), 5.0),
        (".5e1 + 1.", (0, 0), 6.0),
    ],
)
def test_precedence_and_values(source, point, expected):
    assert eval_expr(parse_expr(source), point) == pytest.approx(expected, rel=1e-15)


def test_t_variable():
    assert eval_expr(parse_expr("t*2"), (0, 0), t=1.5) == 3.0


@pytest.mark.parametrize(
    "source, position",
    [("x +", 3), ("(x", 2), ("x y", 2), ("sin x", 4), ("x $ y", 2), ("", 0), ("x^y", 1)],
)
def test_syntax_errors_carry_position(source, position):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(source)
    assert info.value.position == position


def test_expected_token_described():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("(x")
    assert info.value.expected == "')'"


def test_arity_checked():
    with pytest.raises(ExprSyntaxError):
        parse_expr("atan2(x)")
    with pytest.raises(ExprSyntaxError):
        parse_expr("sin(x, y)")


def test_overflowing_literal_rejected():
    with pytest.raises(ExprSyntaxError):
        parse_expr("1e400")


def test_variables_can_be_restricted():
    with pytest.raises(UnknownIdentifierError):
        parse_expr("x + t", variables=("t",))


@pytest.mark.parametrize(
    "source, point",
    [
        ("log(x)", (0, 0)),
        ("log(x)", (-1, 0)),
        ("sqrt(x)", (-1, 0)),
        ("x^0.5", (-8, 0)),
        ("x^-1", (0, 0)),
        ("exp(x)", (1000, 0)),
    ],
)
def test_domain_errors(source, point):
    with pytest.raises(DomainError):
        eval_expr(parse_expr(source), point)


def test_domain_error_names_subexpression():
    with pytest.raises(DomainError) as info:
        eval_expr(parse_expr("1 + log(x - 2)"), (1, 0))
    assert to_source(info.value.node) == "log((x - 2.0))"


def test_vectorized_evaluation_and_broadcast():
    xs = np.linspace(-1, 1, 7)
    out = evaluate(parse_expr("x*x + y"), xs, 2.0)
    np.testing.assert_array_equal(out, xs * xs + 2.0)
    const = evaluate(parse_expr("3"), xs, xs)
    assert const.shape == xs.shape and np.all(const == 3.0)


def test_vectorized_domain_error_if_any_element_fails():
    with pytest.raises(DomainError):
        evaluate(parse_expr("1/x"), np.array([1.0, 0.0, 2.0]))


def test_parse_pair():
    first, second = parse_pair("(-y, x)")
    assert first == Unary("-", Var("y")) and second == Var("x")
    with pytest.raises(ExprSyntaxError):
        parse_pair("(x)")
    with pytest.raises(ExprSyntaxError):
        parse_pair("(x, y) z")


# properties ---------------------------------------------------------------

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


@given(finite, finite, finite)
def test_precedence_property(a, b, c):
    assert eval_expr(parse_expr("x+y*t"), (a, b), t=c) == a + (b * c)
    assert eval_expr(parse_expr("x*y+t"), (a, b), t=c) == (a * b) + c


def _trees():
    leaves = st.one_of(
        st.floats(min_value=0, max_value=50, allow_nan=False).map(Num),
        st.sampled_from([Var("x"), Var("y"), Var("t"), Const("pi")]),
    )

    def extend(children):
        return st.one_of(
            st.builds(Binary, st.sampled_from("+-*/"), children, children),
            st.builds(Unary, st.just("-"), children),
            st.builds(lambda b, e: Pow(b, Num(float(e))), children, st.integers(0, 3)),
            st.builds(lambda n, a: Call(n, (a,)), st.sampled_from(["sin", "cos", "exp", "abs", "sqrt", "log"]), children),
            st.builds(lambda a, b: Call("atan2", (a, b)), children, children),
        )

    return st.recursive(leaves, extend, max_leaves=12)


def _safe_eval(node, point, t):
    try:
        return eval_expr(node, point, t)
    except DomainError:
        return "domain"


@settings(max_examples=200)
@given(_trees())
def test_round_trip(tree):
    again = parse_expr(to_source(tree))
    assert again == tree
    for point, t in [((0.3, -1.2), 0.7), ((2.0, 0.5), -3.0), ((-0.4, 4.0), 1.1)]:
        assert _safe_eval(again, point, t) == _safe_eval(tree, point, t)


@given(_trees(), finite, finite)
def test_determinism(tree, x, y):
    first = _safe_eval(tree, (x, y), 0.25)
    second = _safe_eval(tree, (x, y), 0.25)
    if isinstance(first, float):
        assert math.isfinite(first)
        assert np.float64(first).tobytes() == np.float64(second).tobytes()
    else:
        assert first == second
