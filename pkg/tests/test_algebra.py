from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leeyang.algebra import (LambdaPoly, ResourceError, SparsePoly, as_rational, double_factorial,
                             eval_complex, format_rational, limb_budget, multi_factorial,
                             naive_pow, parse_rational, sparse_pow)

small_q = st.fractions(min_value=-20, max_value=20, max_denominator=12)
lpolys = st.lists(small_q, max_size=5).map(LambdaPoly)


@st.composite
def sparse_polys(draw, d=2, deg=3):
    n = draw(st.integers(1, 4))
    terms = {}
    for _ in range(n):
        w = tuple(draw(st.lists(st.integers(0, deg), min_size=d, max_size=d)))
        terms[w] = LambdaPoly(draw(st.lists(st.integers(-3, 3), min_size=1, max_size=3)))
    return SparsePoly(d, terms)


def test_double_factorial():
    assert [double_factorial(t) for t in (-1, 0, 1, 2, 5, 7)] == [1, 1, 1, 2, 15, 105]
    with pytest.raises(ValueError):
        double_factorial(-3)


def test_multi_factorial():
    assert multi_factorial((2, 2)) == 4
    assert multi_factorial((4, 0)) == 24


def test_rational_io():
    assert parse_rational(" 3/4 ") == Fraction(3, 4)
    assert parse_rational("0.1") == Fraction(1, 10)
    assert format_rational(Fraction(6, 3)) == "2"
    assert format_rational(Fraction(-5, 10)) == "-1/2"
    assert as_rational(0.5) == Fraction(1, 2)
    with pytest.raises(ValueError):
        parse_rational("")


def test_lambda_poly_basics():
    lam = LambdaPoly.lam()
    p = (lam + 1) ** 2
    assert p.coeffs == (1, 2, 1)
    assert p.degree == 2
    assert LambdaPoly([1, 0, 0]).degree == 0
    assert LambdaPoly().is_zero() and LambdaPoly().degree == -1
    assert p(Fraction(1, 2)) == Fraction(9, 4)
    assert str(LambdaPoly([Fraction(35, 384), 0, 1])) == "λ^2 + 35/384"
    assert LambdaPoly.from_json(p.to_json()) == p
    assert p.derivative() == 2 * lam + 2


@given(lpolys, lpolys, small_q)
def test_lambda_poly_ring(p, q, x):
    assert (p + q) - q == p
    assert (p * q)(x) == p(x) * q(x)
    assert (p * q).derivative() == p.derivative() * q + p * q.derivative()


@given(lpolys, st.complex_numbers(max_magnitude=4, allow_nan=False, allow_infinity=False))
def test_eval_complex_bound(p, z):
    val, bound = eval_complex(p, z, 64)
    with mpmath.workprec(256):
        exact, _ = eval_complex(p, z, 256)
        assert abs(val - exact) <= bound + mpmath.mpf(2) ** -200


@settings(max_examples=40, deadline=None)
@given(sparse_polys(), st.integers(0, 5))
def test_sparse_pow_matches_naive(p, e):
    assert sparse_pow(p, e) == naive_pow(p, e)


def test_sparse_pow_budget():
    x = SparsePoly(2, {(1, 0): LambdaPoly([1]), (0, 1): LambdaPoly([0, 1])})
    with pytest.raises(ResourceError):
        sparse_pow(x, 50, budget=5)


def test_limb_budget_env(monkeypatch):
    monkeypatch.setenv("LEEYANG_MAX_MEM", "1234")
    assert limb_budget() == 1234
    monkeypatch.delenv("LEEYANG_MAX_MEM")
    assert limb_budget() > 10**6


def test_sparse_poly_derivative_and_substitution():
    p = SparsePoly(2, {(2, 1): LambdaPoly([1, 1]), (0, 3): LambdaPoly([2])})
    dp = p.derivative(0)
    assert dp.coefficient((1, 1)) == LambdaPoly([2, 2])
    assert dp.coefficient((0, 3)).is_zero()
    assert p.evaluate((1, 2), Fraction(1)) == 2 * 2 + 2 * 8
