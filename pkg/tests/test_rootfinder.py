from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leeyang.algebra import LambdaPoly
from leeyang.moment_engine import compute_an
from leeyang.rootfinder import companion_roots, find_roots, root_symmetry_check


def _from_roots(roots):
    p = LambdaPoly([1])
    for r in roots:
        p = p * LambdaPoly([-r, 1])
    return p


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=1, max_size=7))
def test_integer_roots_recovered(roots):
    rs = find_roots(_from_roots(roots))
    found = sorted(round(float(z.real)) for z in rs.roots)
    assert found == sorted(roots)
    assert sum(m for _, m in rs.distinct()) == len(roots)
    for c, _ in rs.distinct():
        assert abs(c - round(float(c.real))) < 1e-30
    for z, r in zip(rs.roots, rs.radii):
        assert abs(z - round(float(z.real))) <= r


def test_multiplicity_clusters():
    p = _from_roots([Fraction(1, 3)] * 3 + [2, 2, -1])
    rs = find_roots(p)
    mult = {round(float(c.real), 6): m for c, m in rs.distinct()}
    assert mult == {round(1 / 3, 6): 3, 2.0: 2, -1.0: 1}
    center = [c for c, m in rs.distinct() if m == 3][0]
    with mpmath.workprec(rs.precisionBits):
        assert abs(center - mpmath.mpf(1) / 3) < mpmath.mpf(10) ** -30


def test_origin_zeros():
    rs = find_roots(LambdaPoly([0, 0, -1, 0, 1]))
    d = dict((round(float(c.real), 8), m) for c, m in rs.distinct())
    assert d == {0.0: 2, 1.0: 1, -1.0: 1}


def test_errors():
    with pytest.raises(ValueError):
        find_roots(LambdaPoly([3]))
    with pytest.raises(ValueError):
        find_roots(LambdaPoly())


def test_agrees_with_companion_oracle(v1):
    an = compute_an(v1, 10)
    ours = np.array(find_roots(an).as_complex())
    theirs = np.array(companion_roots(an))
    for z in theirs:
        assert np.min(np.abs(ours - z)) < 1e-8


def test_inclusion_radii_contain_roots(v1):
    an = compute_an(v1, 12)
    low = find_roots(an, 128)
    high = find_roots(an, 512)
    for z, r in zip(low.roots, low.radii):
        assert min(abs(z - w) for w in high.roots) <= r


def test_symmetries(v1):
    rs = find_roots(compute_an(v1, 8))
    assert rs.certified
    assert root_symmetry_check(rs, "conjugation").matched
    assert root_symmetry_check(rs, "inversion").matched


def test_symmetry_detects_asymmetry():
    rs = find_roots(LambdaPoly([-2, 1]) * LambdaPoly([1, 0, 1]) * LambdaPoly([-3, 1]))
    assert root_symmetry_check(rs, "conjugation").matched
    assert not root_symmetry_check(rs, "inversion").matched
    with pytest.raises(ValueError):
        root_symmetry_check(rs, "rotation")


def test_high_degree(v1):
    # A_30 has degree 60; the roots must satisfy the polynomial to working precision
    rs = find_roots(compute_an(v1, 30))
    assert rs.polynomialDegree == 60 and len(rs.roots) == 60
    assert rs.certified


def test_complex_coefficients():
    coeffs = [mpmath.mpc(0, 1), mpmath.mpc(0), mpmath.mpc(1)]  # z^2 + i
    rs = find_roots(coeffs)
    for z in rs.roots:
        assert abs(z * z + 1j) < mpmath.mpf(10) ** -30
