"""Exact scalars, dense lambda-polynomials, sparse x-polynomials and
multiprecision helpers shared by the rest of the package.
"""
from __future__ import annotations

import math
import os
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import mpmath

Rational = Fraction
MultiIndex = tuple

DEFAULT_LIMB_BUDGET = 10**8
LIMB_BITS = 64


class ResourceError(RuntimeError):
    """Raised when an exact computation would exceed its size budget."""


def limb_budget() -> int:
    env = os.environ.get("LEEYANG_MAX_MEM")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return DEFAULT_LIMB_BUDGET


def double_factorial(t: int) -> int:
    if t < -1:
        raise ValueError("double factorial needs t >= -1")
    out = 1
    while t > 1:
        out *= t
        t -= 2
    return out


def multi_factorial(w: Sequence[int]) -> int:
    out = 1
    for x in w:
        out *= math.factorial(x)
    return out


def gamma_factorial(x: Fraction, prec: int) -> mpmath.mpf:
    """x! for integer or half-integer x via Gamma."""
    with mpmath.workprec(prec):
        if x.denominator == 1:
            return mpmath.mpf(math.factorial(int(x)))
        return mpmath.gamma(mpmath.mpf(x.numerator) / x.denominator + 1)


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def parse_rational(s: str) -> Fraction:
    s = s.strip()
    if not s:
        raise ValueError("empty rational")
    return Fraction(s)


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def to_mpc(z, prec: int) -> mpmath.mpc:
    """Convert an exact or numeric scalar to mpc at the given precision."""
    with mpmath.workprec(prec):
        if isinstance(z, Fraction):
            return mpmath.mpc(mpmath.mpf(z.numerator) / z.denominator)
        if isinstance(z, tuple) and len(z) == 2:
            re, im = (as_rational(t) for t in z)
            return mpmath.mpc(mpmath.mpf(re.numerator) / re.denominator,
                              mpmath.mpf(im.numerator) / im.denominator)
        return mpmath.mpc(z)


class LambdaPoly:
    """Dense univariate polynomial in lambda with rational coefficients."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)
        self._hash = None

    @classmethod
    def constant(cls, c) -> LambdaPoly:
        return cls([c])

    @classmethod
    def monomial(cls, deg: int, c=1) -> LambdaPoly:
        return cls([0] * deg + [c])

    @classmethod
    def lam(cls) -> LambdaPoly:
        return cls([0, 1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def constant_value(self) -> Fraction:
        if len(self.coeffs) > 1:
            raise ValueError("polynomial is not constant")
        return self.coeffs[0] if self.coeffs else Fraction(0)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = LambdaPoly.constant(other)
        if not isinstance(other, LambdaPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.coeffs)
        return self._hash

    def __repr__(self) -> str:
        return f"LambdaPoly({[format_rational(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mag = format_rational(abs(c))
            if i == 0:
                body = mag
            else:
                mono = "λ" if i == 1 else f"λ^{i}"
                body = mono if abs(c) == 1 else f"{mag}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    @staticmethod
    def _coerce(other) -> LambdaPoly:
        if isinstance(other, LambdaPoly):
            return other
        return LambdaPoly.constant(other)

    def __add__(self, other) -> LambdaPoly:
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return LambdaPoly(out)

    __radd__ = __add__

    def __neg__(self) -> LambdaPoly:
        return LambdaPoly([-c for c in self.coeffs])

    def __sub__(self, other) -> LambdaPoly:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> LambdaPoly:
        return self._coerce(other) - self

    def __mul__(self, other) -> LambdaPoly:
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return LambdaPoly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] += x * y
        return LambdaPoly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> LambdaPoly:
        if e < 0:
            raise ValueError("negative power")
        out = LambdaPoly.constant(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def scale(self, c) -> LambdaPoly:
        c = as_rational(c)
        return LambdaPoly([x * c for x in self.coeffs])

    def derivative(self) -> LambdaPoly:
        return LambdaPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def __call__(self, x) -> Fraction:
        """Exact evaluation at a rational point."""
        x = as_rational(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_numeric(self, z):
        """Horner in the numeric type of z (float, complex, ndarray or mpmath)."""
        if isinstance(z, (mpmath.mpf, mpmath.mpc)):
            cs = [mpmath.mpf(c.numerator) / c.denominator for c in self.coeffs]
        else:
            cs = [float(c) for c in self.coeffs]
        acc = 0 * z
        for c in reversed(cs):
            acc = acc * z + c
        return acc

    def to_json(self) -> list[str]:
        return [format_rational(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence) -> LambdaPoly:
        if not isinstance(data, (list, tuple)):
            raise ValueError("LambdaPoly must be a list of rational strings")
        return cls(parse_rational(str(x)) for x in data)

    def denominator_lcm(self) -> int:
        out = 1
        for c in self.coeffs:
            out = math.lcm(out, c.denominator)
        return out


def eval_complex(p: LambdaPoly, z, prec: int | None = None) -> tuple[mpmath.mpc, mpmath.mpf]:
    """Horner evaluation of p at z with a running first-order error bound.

    Returns (value, bound) with |computed - exact| <= bound.
    """
    if prec is None:
        prec = max(53, getattr(z, "context", mpmath.mp).prec)
    if prec < 53:
        raise ValueError("precision must be at least 53 bits")
    with mpmath.workprec(prec):
        z = mpmath.mpc(z)
        if p.is_zero():
            return mpmath.mpc(0), mpmath.mpf(0)
        az = abs(z)
        acc = mpmath.mpc(0)
        mu = mpmath.mpf(0)
        for c in reversed(p.coeffs):
            acc = acc * z + mpmath.mpf(c.numerator) / c.denominator
            mu = mu * az + abs(acc)
        u = mpmath.ldexp(1, 1 - prec)
        # complex multiply-add and coefficient rounding, with margin
        bound = 12 * u * mu
        return acc, bound


class SparsePoly:
    """Sparse polynomial in x_1..x_d whose coefficients are LambdaPolys."""

    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms: Mapping[tuple, LambdaPoly] | None = None):
        self.d = d
        clean: dict[tuple, LambdaPoly] = {}
        for w, c in (terms or {}).items():
            w = tuple(int(x) for x in w)
            if len(w) != d or any(x < 0 for x in w):
                raise ValueError(f"bad multi-index {w} for d={d}")
            c = c if isinstance(c, LambdaPoly) else LambdaPoly.constant(c)
            if not c.is_zero():
                clean[w] = clean[w] + c if w in clean else c
        self.terms = {w: clean[w] for w in sorted(clean) if not clean[w].is_zero()}

    @classmethod
    def one(cls, d: int) -> SparsePoly:
        return cls(d, {(0,) * d: LambdaPoly.constant(1)})

    def __eq__(self, other) -> bool:
        return isinstance(other, SparsePoly) and self.d == other.d and self.terms == other.terms

    def __repr__(self) -> str:
        return f"SparsePoly(d={self.d}, terms={self.terms!r})"

    def __add__(self, other: SparsePoly) -> SparsePoly:
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out[w] + c if w in out else c
        return SparsePoly(self.d, out)

    def __sub__(self, other: SparsePoly) -> SparsePoly:
        return self + other.scale(-1)

    def scale(self, c) -> SparsePoly:
        if isinstance(c, LambdaPoly):
            return SparsePoly(self.d, {w: v * c for w, v in self.terms.items()})
        return SparsePoly(self.d, {w: v.scale(c) for w, v in self.terms.items()})

    def __mul__(self, other: SparsePoly) -> SparsePoly:
        """Naive sparse product over LambdaPoly coefficients."""
        out: dict[tuple, LambdaPoly] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = tuple(a + b for a, b in zip(w1, w2))
                prod = c1 * c2
                out[w] = out[w] + prod if w in out else prod
        return SparsePoly(self.d, out)

    def coefficient(self, w: Sequence[int]) -> LambdaPoly:
        return self.terms.get(tuple(w), LambdaPoly())

    def degrees(self) -> set[int]:
        return {sum(w) for w in self.terms}

    def lambda_degree(self) -> int:
        return max((c.degree for c in self.terms.values()), default=-1)

    def derivative(self, i: int) -> SparsePoly:
        out = {}
        for w, c in self.terms.items():
            if w[i] == 0:
                continue
            w2 = list(w)
            w2[i] -= 1
            out[tuple(w2)] = c.scale(w[i])
        return SparsePoly(self.d, out)

    def substitute_lambda(self, lam) -> SparsePoly:
        lam = as_rational(lam)
        return SparsePoly(self.d, {w: LambdaPoly.constant(c(lam)) for w, c in self.terms.items()})

    def evaluate(self, x: Sequence, lam):
        """Numeric evaluation; x and lam may be float, complex or mpc."""
        total = 0
        for w, c in self.terms.items():
            mono = 1
            for xi, e in zip(x, w):
                if e:
                    mono = mono * xi ** e
            total = total + c.eval_numeric(lam) * mono
        return total


def _pack(values: Sequence[int], bits: int) -> int:
    out = 0
    for v in reversed(values):
        out = (out << bits) + v
    return out


def _unpack(n: int, bits: int, length: int) -> list[int]:
    mask = (1 << bits) - 1
    half = 1 << (bits - 1)
    out = []
    for _ in range(length):
        r = n & mask
        if r >= half:
            r -= 1 << bits
        out.append(r)
        n = (n - r) >> bits
    if n != 0:
        raise ArithmeticError("Kronecker unpacking overflow")
    return out


def sparse_pow(p: SparsePoly, e: int, budget: int | None = None) -> SparsePoly:
    """Exact e-th power by binary powering.

    Coefficients are cleared to integers and each lambda-polynomial is packed
    into one big integer (Kronecker substitution), so a coefficient product is
    a single bigint multiplication.
    """
    if e < 0:
        raise ValueError("exponent must be nonnegative")
    if e == 0 or not p.terms:
        return SparsePoly.one(p.d) if e == 0 else SparsePoly(p.d)
    budget = limb_budget() if budget is None else budget

    denom = 1
    for c in p.terms.values():
        denom = math.lcm(denom, c.denominator_lcm())
    int_terms = {w: [int(x * denom) for x in c.coeffs] for w, c in p.terms.items()}
    l1 = sum(abs(x) for cs in int_terms.values() for x in cs)
    lam_deg = max(len(cs) for cs in int_terms.values()) - 1
    length = e * lam_deg + 1
    bits = e * max(1, l1.bit_length()) + 2

    n_terms_bound = math.comb(e * max(sum(w) for w in p.terms) + p.d - 1, p.d - 1)
    limbs = n_terms_bound * (length * bits // LIMB_BITS + 1)
    if limbs > budget:
        raise ResourceError(
            f"power {e} needs about {limbs} limbs, over the budget of {budget} "
            "(set LEEYANG_MAX_MEM to raise it)")

    packed = {w: _pack(cs, bits) for w, cs in int_terms.items()}

    def mul(a: dict, b: dict) -> dict:
        out: dict[tuple, int] = {}
        for w1, c1 in a.items():
            for w2, c2 in b.items():
                w = tuple(x + y for x, y in zip(w1, w2))
                out[w] = out.get(w, 0) + c1 * c2
        return {w: c for w, c in out.items() if c}

    result = None
    base = packed
    k = e
    while k:
        if k & 1:
            result = base if result is None else mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)

    scale = Fraction(1, denom ** e)
    out = {}
    for w, c in result.items():
        ints = _unpack(c, bits, length)
        out[w] = LambdaPoly(Fraction(x) * scale for x in ints)
    return SparsePoly(p.d, out)


def naive_pow(p: SparsePoly, e: int) -> SparsePoly:
    out = SparsePoly.one(p.d)
    for _ in range(e):
        out = out * p
    return out
