import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from gpw.smoothfn import (
    DomainError,
    DSLParseError,
    ExpSum,
    Polynomial,
    PowerTranslate,
    derivative,
    eval_tower,
    parse,
    primitive,
    sum_of,
)

Y = sympy.Symbol("y", real=True)


def test_derivative_of_quartic():
    assert sum_of(derivative(parse("poly:0,0,0,0,1"), 2)) == Polynomial((0.0, 0.0, 12.0))


def test_derivative_of_exp_sum():
    d3 = sum_of(derivative(parse("exp:1@1+1@2"), 3))
    assert d3 == ExpSum(((1.0, 1.0), (8.0, 2.0)))


def test_zeroth_derivative_is_identity():
    f = parse("sum:(poly:1,2)|(exp:3@-1)")
    assert derivative(f, 0) is f


@pytest.mark.parametrize(
    "dsl, y, K, expected",
    [
        ("poly:0,0,1", 3.0, 3, [9, 6, 2, 0]),
        ("exp:1@1", 0.0, 4, [1, 1, 1, 1, 1]),
        ("exp:1@1+1@2", 0.0, 2, [2, 3, 5]),
    ],
)
def test_eval_tower(dsl, y, K, expected):
    assert list(eval_tower(parse(dsl), y, K).values) == expected


def test_primitive_examples():
    F = primitive(parse("poly:0,0,1"))
    assert F(2.0) == pytest.approx(8 / 3, abs=1e-15)
    F = primitive(parse("exp:1@2"))
    for y in (-1.0, 0.0, 0.7):
        assert F(y) == pytest.approx((math.exp(2 * y) - 1) / 2, rel=1e-14, abs=1e-15)
    assert primitive(parse("poly:0")).is_zero()


def test_primitive_of_power_anchored_inside_domain():
    f = PowerTranslate(1.0, 0.0, 0.5)
    F = primitive(f)
    assert F(1.0) == pytest.approx(0.0, abs=1e-15)
    assert derivative(F, 1)(2.0) == pytest.approx(f(2.0))


def test_power_domain_is_enforced():
    f = PowerTranslate(1.0, 1.0, 0.5)
    assert f.domain == (-1.0, math.inf)
    with pytest.raises(DomainError):
        eval_tower(f, -2.0, 1)


def test_integer_power_expands_to_polynomial():
    assert sum_of(PowerTranslate(2.0, 1.0, 2)) == Polynomial((2.0, 4.0, 2.0))


@pytest.mark.parametrize("bad, pos", [("poly:", 5), ("poly:1,,2", 7), ("exp:1@", 6), ("nope:1", 0)])
def test_parse_errors_carry_position(bad, pos):
    with pytest.raises(DSLParseError) as info:
        parse(bad)
    assert info.value.position == pos


def test_to_sympy_matches_numeric():
    f = parse("sum:(poly:1,0,3)|(exp:2@-1)|(pow:1.5,2,0.5)")
    expr = f.to_sympy(Y)
    for y in (-0.5, 0.3, 1.7):
        assert float(expr.subs(Y, y)) == pytest.approx(f(y), rel=1e-13)


coeff = st.floats(-5, 5, allow_nan=False).map(lambda v: round(v, 3))
rate = st.sampled_from([-2.0, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0])
polys = st.lists(coeff, min_size=1, max_size=6).map(lambda c: Polynomial(tuple(c)))
exps = st.lists(st.tuples(coeff, rate), min_size=1, max_size=3).map(lambda t: ExpSum(tuple(t)))
funcs = st.one_of(polys, exps, st.tuples(polys, exps).map(lambda p: sum_of(*p)))


@settings(max_examples=60, deadline=None)
@given(funcs)
def test_text_form_round_trip(f):
    g = parse(f.to_dsl())
    ys = np.linspace(-1.5, 1.5, 7)
    assert np.allclose(g(ys), f(ys), rtol=1e-14, atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(funcs, funcs, st.integers(0, 4))
def test_derivative_is_linear(f, g, k):
    ys = np.linspace(-1.0, 1.0, 5)
    lhs = derivative(sum_of(f, g), k)(ys)
    rhs = derivative(f, k)(ys) + derivative(g, k)(ys)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(funcs, st.floats(-1, 1), st.integers(0, 3))
def test_tower_matches_central_differences(f, y, k):
    h = 1e-4
    d = derivative(f, k)
    fd = (d(y - 2 * h) - 8 * d(y - h) + 8 * d(y + h) - d(y + 2 * h)) / (12 * h)
    exact = eval_tower(f, y, k + 1).values[k + 1]
    assert fd == pytest.approx(exact, rel=1e-6, abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(funcs)
def test_primitive_differentiates_back(f):
    F = primitive(f)
    ys = np.linspace(-1.0, 1.0, 5)
    assert np.allclose(derivative(F, 1)(ys), f(ys), rtol=1e-12, atol=1e-12)
