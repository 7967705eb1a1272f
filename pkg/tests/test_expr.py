import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from beltrami.errors import DomainError, ParseError, UnboundVariable
from beltrami.expr import (
    FUNCTIONS,
    BinOp,
    Call,
    Const,
    Neg,
    Num,
    Var,
    as_expr,
    differentiate,
    parse,
    sample,
    to_string,
)
from beltrami.grid import Grid


def test_parse_variable():
    assert parse("x") == Var("x")


def test_arithmetic_examples():
    assert parse("sin(x)*z + 2^3").evaluate({"x": 0.7, "z": 2.0}) == pytest.approx(math.sin(0.7) * 2 + 8)
    assert parse("1/(1+t^2)").evaluate({"t": 1.0}) == 0.5
    assert parse("pi").evaluate() == 3.141592653589793
    assert parse("exp(0)").evaluate() == 1.0


def test_tanh_matches_math_library():
    assert abs(parse("tanh(t)").evaluate({"t": 0.5}) - math.tanh(0.5)) <= 1e-15


@pytest.mark.parametrize(
    "text, value",
    [
        ("2^3^2", 512.0),          # right associative
        ("-2^2", -4.0),            # power binds tighter than unary minus
        ("2^-1", 0.5),
        ("2*3 - 4/2", 4.0),
        ("  1 +\t2 ", 3.0),
        ("--3", 3.0),
        ("1e-3*1000", 1.0),
        (".5 + 1.", 1.5),
    ],
)
def test_precedence_and_lexing(text, value):
    assert parse(text).evaluate() == pytest.approx(value)


def test_unary_minus_is_below_power():
    assert parse("-x^2") == Neg(BinOp("^", Var("x"), Num(2.0)))


@pytest.mark.parametrize(
    "text, offset",
    [("x +", 3), ("(x", 2), ("sin x", 4), ("x $ y", 2), ("2 x", 2), ("foo(1)", 0), ("", 0), ("x^", 2)],
)
def test_parse_errors_report_offsets(text, offset):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.offset == offset
    assert info.value.expected


def test_parse_error_expected_set():
    with pytest.raises(ParseError) as info:
        parse("x *")
    assert "variable" in info.value.expected and "number" in info.value.expected


def test_evaluation_errors():
    with pytest.raises(UnboundVariable):
        parse("x + y").evaluate({"x": 1.0})
    for text in ("ln(0)", "ln(-1)", "sqrt(-1)", "1/0", "(-2)^0.5", "0^-1"):
        with pytest.raises(DomainError):
            parse(text).evaluate()


def test_vectorized_evaluation():
    x = np.linspace(0, 1, 5)
    np.testing.assert_allclose(parse("x^2 + 1").evaluate({"x": x}), x**2 + 1)


@pytest.mark.parametrize(
    "text, var, expect, point",
    [
        ("3*t", "t", 3.0, 0.4),
        ("t^2/2", "t", 0.4, 0.4),
        ("x*y", "y", 2.0, None),
        ("sin(x)", "t", 0.0, None),
    ],
)
def test_derivative_examples(text, var, expect, point):
    d = differentiate(parse(text), var)
    bind = {"t": point} if point is not None else {"x": 2.0, "y": 3.0}
    assert d.evaluate(bind) == pytest.approx(expect)


def test_tanh_derivative_against_difference():
    e = parse("tanh(t)")
    d = differentiate(e, "t").evaluate({"t": 0.3})
    h = 1e-6
    fd = (e.evaluate({"t": 0.3 + h}) - e.evaluate({"t": 0.3 - h})) / (2 * h)
    assert abs(d - fd) <= 1e-8


def test_derivative_is_an_expression_of_the_grammar():
    d = differentiate(parse("x^y"), "y")
    assert to_string(parse(to_string(d))) == to_string(d)
    assert d.evaluate({"x": 2.0, "y": 3.0}) == pytest.approx(8 * math.log(2))


def test_literal_folding_only():
    assert as_expr(2.5) == Num(2.5)
    assert differentiate(parse("t"), "t") == Num(1.0)
    with pytest.raises(ValueError):
        differentiate(parse("t"), "w")


def test_sample_on_cylindrical_grid():
    g = Grid.box((0.5, 0.0, 0.0), (1.5, 1.0, 1.0), (5, 5, 5), "cylindrical_rz")
    f = sample(parse("x^2 + y^2"), g)
    R = g.mesh()[0]
    np.testing.assert_allclose(f.values, R**2, rtol=1e-13)


# ----------------------------------------------------------------------------
# properties

leaves = st.one_of(
    st.floats(-50, 50, allow_nan=False).map(lambda v: Num(round(v, 4))),
    st.integers(0, 30).map(lambda v: Num(float(v))),
    st.just(Const()),
    st.sampled_from(["x", "y", "z", "r", "theta", "t"]).map(Var),
)


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from(FUNCTIONS), children).map(lambda a: Call(*a)),
        st.tuples(st.sampled_from(["+", "-", "*", "/", "^"]), children, children).map(lambda a: BinOp(*a)),
    )


asts = st.recursive(leaves, _extend, max_leaves=12)


@given(asts)
def test_print_parse_print_is_a_fixed_point(e):
    s = to_string(e)
    assert to_string(parse(s)) == s


@given(asts)
def test_parse_of_print_evaluates_like_original(e):
    b = {"x": 0.3, "y": 0.7, "z": 1.1, "r": 0.9, "theta": 0.2, "t": 0.5}
    try:
        want = e.evaluate(b)
    except DomainError:
        return
    assume(np.isfinite(want))
    got = parse(to_string(e)).evaluate(b)
    assert got == pytest.approx(want, rel=1e-12, abs=1e-300) or (np.isnan(got) and np.isnan(want))


inner = st.sampled_from(["t", "2*t + 0.5", "t^2 + 1", "sin(t)", "0.3*t - 1"])
outer = st.sampled_from(FUNCTIONS + ("^3", "^t", "/(2 + t^2)"))


@given(outer, inner, st.floats(0.2, 1.2))
def test_derivative_matches_finite_difference(fn, arg, t):
    text = f"({arg}){fn}" if not fn.isalpha() else f"{fn}({arg})"
    e = parse(text)
    try:
        d = differentiate(e, "t").evaluate({"t": t})
        h = 1e-4
        fd = (8 * (e.evaluate({"t": t + h}) - e.evaluate({"t": t - h}))
              - (e.evaluate({"t": t + 2 * h}) - e.evaluate({"t": t - 2 * h}))) / (12 * h)
    except DomainError:
        return
    assert abs(d - fd) <= 1e-6 * max(abs(d), 1.0)
