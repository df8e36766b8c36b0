"""Exact A_n through Gaussian moments of powers of the potential.

A_n(lambda) = sum_{|s| = nM} prod_i (2 s_i - 1)!! [x^{2s}] V^{nK} / (nK)!

and the matching sphere integral of V^{nK} over S^{d-1}.
"""
from __future__ import annotations

import math
from fractions import Fraction

import mpmath

from .algebra import LambdaPoly, double_factorial, eval_complex, gamma_factorial, sparse_pow
from .potential import Potential


def _exponents(p: Potential, n: int) -> tuple[int, int] | None:
    nK, nM = n * p.K, n * p.M
    if nK.denominator != 1 or nM.denominator != 1:
        return None
    return int(nK), int(nM)


def compute_an(p: Potential, n: int, budget: int | None = None) -> LambdaPoly:
    if n < 0:
        raise ValueError("n must be nonnegative")
    p.require_valid()
    ex = _exponents(p, n)
    if ex is None:
        return LambdaPoly()
    nK, nM = ex
    power = sparse_pow(p.as_sparse(), nK, budget=budget)
    total = LambdaPoly()
    # one pass over the stored support; monomials with an odd exponent drop out
    for w, c in power.terms.items():
        if any(e % 2 for e in w):
            continue
        if sum(w) != 2 * nM:
            continue
        weight = 1
        for e in w:
            weight *= double_factorial(e - 1)
        total = total + c.scale(weight)
    return total.scale(Fraction(1, math.factorial(nK)))


def an_at_point(p: Potential, n: int, lam=None, budget: int | None = None) -> Fraction:
    """Exact A_n at a rational parameter point.

    With lam given, lambda is substituted into the Lambda_w first, which keeps
    the arithmetic scalar.  Without it the potential must already be numeric.
    """
    if lam is not None:
        p = p.at(lam)
    if not p.is_numeric():
        raise ValueError("an_at_point needs constant Lambda_w or an explicit lam")
    return compute_an(p, n, budget=budget).constant_value()


def sphere_prefactor(p: Potential, n: int, prec: int = 128) -> mpmath.mpf:
    """Factor c with A_n = c * integral_{S^{d-1}} V^{nK}."""
    ex = _exponents(p, n)
    if ex is None:
        raise ValueError(f"n={n} is not admissible for k={p.k}")
    nK, nM = ex
    half = Fraction(p.d - 2, 2)
    with mpmath.workprec(prec + 20):
        num = mpmath.power(2, nM + mpmath.mpf(half.numerator) / half.denominator) \
            * gamma_factorial(nM + half, prec + 20)
        den = mpmath.power(2 * mpmath.pi, mpmath.mpf(p.d) / 2) * math.factorial(nK)
        out = num / den
    with mpmath.workprec(prec):
        return +out


def sphere_integral(p: Potential, n: int, lam, prec: int = 128) -> mpmath.mpc:
    an = compute_an(p, n)
    with mpmath.workprec(prec + 20):
        val, _ = eval_complex(an, lam, prec + 20)
        out = val / sphere_prefactor(p, n, prec + 20)
    with mpmath.workprec(prec):
        return +out


def sphere_quadrature(p: Potential, n: int, lam, prec: int = 64) -> mpmath.mpc:
    """Direct quadrature of the circle integral of V^{nK} (d=2 only); an oracle."""
    if p.d != 2:
        raise ValueError("quadrature oracle is implemented for d=2")
    ex = _exponents(p, n)
    if ex is None:
        raise ValueError(f"n={n} is not admissible for k={p.k}")
    nK, _ = ex
    sp = p.as_sparse()
    with mpmath.workprec(prec):
        lam = mpmath.mpc(lam)
        coeffs = {w: c.eval_numeric(lam) for w, c in sp.terms.items()}

        def integrand(theta):
            c, s = mpmath.cos(theta), mpmath.sin(theta)
            v = mpmath.fsum(a * c ** w[0] * s ** w[1] for w, a in coeffs.items())
            return v ** nK

        pieces = [2 * mpmath.pi * j / 8 for j in range(9)]
        return mpmath.quad(integrand, pieces)
