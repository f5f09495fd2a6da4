from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from hexmass.hex8 import SHAPE_POLYNOMIALS
from hexmass.polycube import (
    ETA,
    ONE,
    XI,
    ZETA,
    Polynomial3,
    PolynomialSyntaxError,
    format_polynomial,
    integrate_cube,
    monomial_integral,
    parse_polynomial,
    parse_rational,
    poly_eval,
    poly_mul,
    rational_str,
)

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=12)
exponents = st.tuples(*(st.integers(0, 4),) * 3)
polys = st.dictionaries(exponents, fractions, max_size=6).map(Polynomial3)
points = st.tuples(*(st.fractions(min_value=-1, max_value=1, max_denominator=16),) * 3)


def test_difference_of_squares():
    assert poly_mul(ONE + XI, ONE - XI) == ONE - XI**2


def test_corner_shape_product():
    n1, n7 = SHAPE_POLYNOMIALS[0], SHAPE_POLYNOMIALS[6]
    expected = (ONE - XI**2) * (ONE - ETA**2) * (ONE - ZETA**2) / 64
    assert n1 * n7 == expected


@given(polys)
def test_multiplicative_identity(p):
    assert p * ONE == p
    assert poly_mul(ONE, p) == p


def test_zero_coefficients_dropped():
    p = Polynomial3({(1, 0, 0): 0, (0, 0, 0): 2})
    assert p.terms == {(0, 0, 0): Fraction(2)}
    assert (XI - XI).terms == {}


def test_eval_examples():
    assert poly_eval(ONE - XI**2, (1, 0, 0)) == 0
    assert poly_eval(10 * XI, (Fraction(1, 10), 0, 0)) == 1
    assert poly_eval(Polynomial3.constant(3), (Fraction(1, 3), -1, Fraction(2, 7))) == 3
    assert isinstance(poly_eval(XI * ETA, (Fraction(1, 2), Fraction(1, 3), 0)), Fraction)


def test_eval_array_input():
    p = 1 + 2 * XI * ETA - ZETA**2
    x = np.linspace(-1, 1, 5)
    np.testing.assert_allclose(p(x, x, x), 1 + 2 * x * x - x**2)


@settings(max_examples=100)
@given(polys, polys, points)
def test_product_evaluates_to_product(p, q, x):
    assert poly_eval(poly_mul(p, q), x) == poly_eval(p, x) * poly_eval(q, x)


@pytest.mark.parametrize(
    "exps, expected",
    [((0, 0, 0), Fraction(8)), ((1, 2, 0), Fraction(0)), ((2, 0, 4), Fraction(8, 15))],
)
def test_monomial_integral(exps, expected):
    assert monomial_integral(*exps) == expected


def test_monomial_integral_against_sympy():
    x, y, z = sp.symbols("x y z")
    for a in range(5):
        for b in range(5):
            for c in range(3):
                ref = sp.integrate(x**a * y**b * z**c, (x, -1, 1), (y, -1, 1), (z, -1, 1))
                assert monomial_integral(a, b, c) == Fraction(int(ref.p), int(ref.q))


def test_integrate_shape_functions():
    # eight terms of N1, each integrated separately
    n1 = SHAPE_POLYNOMIALS[0]
    assert len(n1) == 8
    assert sum(c * monomial_integral(*e) for e, c in n1.items()) == 1
    assert integrate_cube(n1) == 1
    assert integrate_cube(n1 * n1) == Fraction(8, 27)
    assert integrate_cube(XI * ETA * ZETA) == 0


@given(polys, polys, fractions, fractions)
def test_integration_is_linear(p, q, a, b):
    assert integrate_cube(a * p + b * q) == a * integrate_cube(p) + b * integrate_cube(q)


@given(polys, st.integers(0, 2))
def test_odd_polynomials_integrate_to_zero(p, axis):
    # keep only terms odd in the chosen variable
    odd = Polynomial3({e: c for e, c in p.items() if e[axis] % 2 == 1})
    assert integrate_cube(odd) == 0


def test_large_products_stay_exact():
    p = (ONE + XI / 3 + ETA / 7 - ZETA / 11) ** 12
    v = integrate_cube(p)
    assert isinstance(v, Fraction) and v > 8


def test_derivative():
    p = XI**2 * ETA + 3 * ZETA
    assert p.derivative(0) == 2 * XI * ETA
    assert p.derivative(1) == XI**2
    assert p.derivative(2) == Polynomial3.constant(3)


def test_degrees():
    p = XI**2 * ETA + ZETA**3
    assert p.degrees == (2, 1, 3)
    assert p.total_degree == 3


@pytest.mark.parametrize(
    "text, expected",
    [
        ("1", ONE),
        ("1 + x/2", None),
        ("1 + 0.5*x", ONE + XI / 2),
        ("-2*x^2*y + z", -2 * XI**2 * ETA + ZETA),
        ("3/4*x*y*z - 1e-1", Fraction(3, 4) * XI * ETA * ZETA - Fraction(1, 10)),
        ("x*x", XI**2),
    ],
)
def test_parse_polynomial(text, expected):
    if expected is None:
        with pytest.raises(PolynomialSyntaxError):
            parse_polynomial(text)
    else:
        assert parse_polynomial(text) == expected


@pytest.mark.parametrize("text", ["", "1 +", "x^9", "2*w", "1..2"])
def test_parse_rejects(text):
    with pytest.raises(PolynomialSyntaxError):
        parse_polynomial(text)


@given(st.dictionaries(st.tuples(*(st.integers(0, 8),) * 3), fractions, max_size=6).map(Polynomial3))
def test_parse_print_round_trip(p):
    text = format_polynomial(p)
    assert parse_polynomial(text) == p
    assert parse_polynomial(format_polynomial(parse_polynomial(text))) == p


def test_rational_strings():
    assert rational_str(Fraction(128, 27)) == "128/27"
    assert rational_str(Fraction(2)) == "2/1"
    assert parse_rational("-40/27") == Fraction(-40, 27)
    assert parse_rational("5") == 5
