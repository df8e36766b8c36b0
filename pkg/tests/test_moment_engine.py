from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leeyang.algebra import LambdaPoly
from leeyang.moment_engine import (an_at_point, compute_an, sphere_integral, sphere_prefactor,
                                   sphere_quadrature)
from leeyang.potential import Potential, ising1, ising2, single_monomial

A2 = LambdaPoly([Fraction(35, 384), Fraction(5, 32), Fraction(19, 64), Fraction(5, 32), Fraction(35, 384)])


def test_a0_is_one(v1):
    assert compute_an(v1, 0) == LambdaPoly([1])


def test_a1_a2(v1):
    assert compute_an(v1, 1) == LambdaPoly([Fraction(1, 8), Fraction(1, 4), Fraction(1, 8)])
    assert compute_an(v1, 2) == A2


def test_a2_at_one_is_19_over_24(v1):
    # the build contract quotes 25/32 here; the coefficient sum is 152/192
    assert A2(1) == Fraction(19, 24)
    assert an_at_point(v1, 2, 1) == Fraction(19, 24)


def test_inadmissible_is_zero():
    p5 = single_monomial(5)
    assert compute_an(p5, 1).is_zero()
    with pytest.raises(ValueError):
        compute_an(ising1(), -1)


def test_monomial_closed_form():
    # V = x^4/24 in one colour: A_n = (4n-1)!! / (24^n n!)
    from leeyang.algebra import double_factorial
    import math
    p = single_monomial(4, 1)
    for n in range(5):
        assert compute_an(p, n).constant_value() == Fraction(double_factorial(4 * n - 1), 24 ** n * math.factorial(n))


def test_palindromic_v1(v1):
    # A_n(lambda) = lambda^{2n} A_n(1/lambda) for the first Ising potential
    for n in (3, 5):
        c = compute_an(v1, n).coeffs
        assert c == c[::-1]


def test_scaling_homogeneity(v1):
    c = Fraction(3, 2)
    for n in (1, 3):
        assert compute_an(v1.scaled(c), n) == compute_an(v1, n).scale(c ** n)


@settings(max_examples=10, deadline=None)
@given(st.fractions(min_value=-3, max_value=3, max_denominator=5), st.integers(1, 4))
def test_point_evaluation_consistency(lam, n):
    p = ising2()
    assert an_at_point(p, n, lam) == compute_an(p, n)(lam)


@pytest.mark.parametrize("lam", [1, 1j, 0.3 + 0.7j])
def test_sphere_integral_matches_quadrature(v1, lam):
    for n in (1, 3):
        exact = sphere_integral(v1, n, lam, 80)
        quad = sphere_quadrature(v1, n, lam, 80)
        assert abs(exact - quad) <= mpmath.mpf(10) ** -18 * abs(exact)


def test_sphere_prefactor_d3():
    p = Potential(3, 4, {(4, 0, 0): 1, (0, 4, 0): 1, (0, 0, 4): 1})
    # area of S^2 is 4 pi; for n=0, A_0 = 1 = c * 4 pi
    assert abs(sphere_prefactor(p, 0) * 4 * mpmath.pi - 1) < mpmath.mpf(10) ** -30


def test_large_n_runs(v1):
    an = compute_an(v1, 40)
    assert an.degree == 80
    assert all(c > 0 for c in an.coeffs)
