"""Critical points of V restricted to the complexified circle (d = 2).

Points are found from the binary form g = x2*dV/dx1 - x1*dV/dx2 through its
dehomogenisation p(t) = g(t, 1), t = x1/x2, with the pair (+-1, 0) handled
through the root multiplicity at t = infinity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .algebra import LambdaPoly, SparsePoly, as_rational
from .potential import Potential
from .rootfinder import find_roots

MAX_CRIT_PREC = 512


class CertificationError(RuntimeError):
    pass


class DivisorError(ValueError):
    pass


def _require_d2(p: Potential) -> None:
    if p.d != 2:
        raise ValueError("the critical-point solver handles d = 2 only; "
                         "supply critical points externally for d >= 3")
    p.require_valid()


def binary_coeffs(p: Potential) -> list[LambdaPoly]:
    """Coefficients c_i of x1^i x2^(k-i) in V."""
    sp = p.as_sparse()
    return [sp.coefficient((i, p.k - i)) for i in range(p.k + 1)]


def form_coeffs(sp: SparsePoly, deg: int) -> list[LambdaPoly]:
    return [sp.coefficient((i, deg - i)) for i in range(deg + 1)]


def g_coeffs(p: Potential) -> list[LambdaPoly]:
    """Coefficients of x1^i x2^(k-i) in x2 dV/dx1 - x1 dV/dx2."""
    k = p.k
    c = binary_coeffs(p)
    out = [LambdaPoly() for _ in range(k + 1)]
    for j, cj in enumerate(c):
        if cj.is_zero():
            continue
        if j >= 1:
            out[j - 1] = out[j - 1] + cj.scale(j)
        if j + 1 <= k:
            out[j + 1] = out[j + 1] - cj.scale(k - j)
    return out


def _to_mp(lam, prec: int):
    with mpmath.workprec(prec):
        if isinstance(lam, (Fraction, int)):
            q = as_rational(lam)
            return mpmath.mpc(mpmath.mpf(q.numerator) / q.denominator)
        return mpmath.mpc(lam)


def _eval_list(cs: Sequence[LambdaPoly], lam) -> list:
    return [c.eval_numeric(lam) if not c.is_zero() else mpmath.mpc(0) for c in cs]


def _form_value(c: list, x1, x2):
    k = len(c) - 1
    return mpmath.fsum(ci * x1 ** i * x2 ** (k - i) for i, ci in enumerate(c) if ci != 0)


def _form_abs(c: list, x1, x2):
    k = len(c) - 1
    return mpmath.fsum(abs(ci) * abs(x1) ** i * abs(x2) ** (k - i) for i, ci in enumerate(c))


def _grad_hess(c: list, x1, x2):
    k = len(c) - 1
    v = d1 = d2 = h11 = h12 = h22 = mpmath.mpc(0)
    for i, ci in enumerate(c):
        if ci == 0:
            continue
        j = k - i
        v += ci * x1 ** i * x2 ** j
        if i >= 1:
            d1 += i * ci * x1 ** (i - 1) * x2 ** j
        if j >= 1:
            d2 += j * ci * x1 ** i * x2 ** (j - 1)
        if i >= 2:
            h11 += i * (i - 1) * ci * x1 ** (i - 2) * x2 ** j
        if i >= 1 and j >= 1:
            h12 += i * j * ci * x1 ** (i - 1) * x2 ** (j - 1)
        if j >= 2:
            h22 += j * (j - 1) * ci * x1 ** i * x2 ** (j - 2)
    return v, (d1, d2), (h11, h12, h22)


def _tangential_hessian(c: list, s1, s2):
    """d^2/dtheta^2 log V(cos(theta) s + sin(theta) s_perp) at theta = 0."""
    k = len(c) - 1
    v, (d1, d2), (h11, h12, h22) = _grad_hess(c, s1, s2)
    p1, p2 = -s2, s1
    vt = d1 * p1 + d2 * p2
    vtt = h11 * p1 * p1 + 2 * h12 * p1 * p2 + h22 * p2 * p2 - k * v
    return vtt / v - (vt / v) ** 2, v


def _ambient_hessian_det(c: list, s1, s2):
    """det of the 2x2 Hessian of log V at s."""
    v, (d1, d2), (h11, h12, h22) = _grad_hess(c, s1, s2)
    a11 = h11 / v - d1 * d1 / v ** 2
    a12 = h12 / v - d1 * d2 / v ** 2
    a22 = h22 / v - d2 * d2 / v ** 2
    return a11 * a22 - a12 * a12


@dataclass
class CriticalPointRecord:
    sigma: tuple | None
    tCoord: object
    value: object
    hessian: object
    ambientHessian: object
    multiplicity: int = 1
    onDivisor: bool = False
    degenerate: bool = False
    ambientDegenerate: bool = False
    atInfinity: bool = False
    residual: object = 0

    def to_json(self, digits: int = 30) -> dict:
        def cx(z):
            if z is None:
                return None
            if isinstance(z, str):
                return z
            if not isinstance(z, mpmath.mpc):
                z = mpmath.mpc(z)
            return [mpmath.nstr(z.real, digits), mpmath.nstr(z.imag, digits)]

        return {
            "sigma": None if self.sigma is None else [cx(self.sigma[0]), cx(self.sigma[1])],
            "t": cx(self.tCoord),
            "value": cx(self.value),
            "hessian": cx(self.hessian),
            "ambient_hessian": cx(self.ambientHessian),
            "multiplicity": self.multiplicity,
            "on_divisor": self.onDivisor,
            "degenerate": self.degenerate,
            "ambient_degenerate": self.ambientDegenerate,
            "at_infinity": self.atInfinity,
        }


@dataclass
class CriticalSet:
    """All critical records at one lambda; iterating yields crit(F_lambda)."""

    lam: object
    precision: int
    records: list[CriticalPointRecord]
    warnings: list[str] = field(default_factory=list)
    infinity_multiplicity: int = 0

    @property
    def points(self) -> list[CriticalPointRecord]:
        return [r for r in self.records if not r.atInfinity and not r.onDivisor]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def count_with_multiplicity(self) -> int:
        return sum(r.multiplicity for r in self.points)

    @property
    def nearDiscriminant(self) -> bool:
        return bool(self.warnings)


def _lift(t, prec):
    with mpmath.workprec(prec):
        x2 = 1 / mpmath.sqrt(1 + t * t)
        return t * x2, x2


def _solve(p: Potential, lam, prec: int) -> CriticalSet:
    k = p.k
    with mpmath.workprec(prec):
        lam = _to_mp(lam, prec)
        vc = _eval_list(binary_coeffs(p), lam)
        gc = _eval_list(g_coeffs(p), lam)
        scale = max(abs(x) for x in gc)
        if scale == 0:
            raise ValueError("x2*dV/dx1 - x1*dV/dx2 vanishes identically: critical locus is not finite")
        small = mpmath.ldexp(scale, -(3 * prec) // 4)
        deg = max(i for i, x in enumerate(gc) if abs(x) > small)
        trimmed = [x if abs(x) > small else mpmath.mpc(0) for x in gc[:deg + 1]]
        inf_mult = k - deg
        warnings = []
        if any(abs(x) <= small and x != 0 for x in gc):
            warnings.append("a coefficient of p(t) is numerically zero")

        roots: list[tuple[object, int]] = []
        if deg >= 1:
            rs = find_roots(trimmed, max(prec, 128))
            roots = rs.distinct()
        tol_unit = mpmath.ldexp(1, -(prec // 2))
        cert = mpmath.ldexp(1, -(prec * 83) // 128)
        deg_tol = mpmath.ldexp(1, -(prec // 4))

        records: list[CriticalPointRecord] = []

        def make(s1, s2, t, mult):
            v = _form_value(vc, s1, s2)
            vabs = _form_abs(vc, s1, s2)
            rec = CriticalPointRecord(sigma=(s1, s2), tCoord=t, value=v, hessian=None,
                                      ambientHessian=None, multiplicity=mult)
            _, (d1, d2), _ = _grad_hess(vc, s1, s2)
            resid = abs(s2 * d1 - s1 * d2)
            gabs = _form_abs(gc, s1, s2) + k * vabs
            rec.residual = resid
            if resid > cert * max(gabs, 1) or abs(s1 * s1 + s2 * s2 - 1) > cert:
                raise CertificationError(f"Lagrange residual {mpmath.nstr(resid, 5)} too large")
            if abs(v) <= tol_unit * vabs:
                rec.onDivisor = True
                return rec
            h, _ = _tangential_hessian(vc, s1, s2)
            rec.hessian = h
            rec.ambientHessian = _ambient_hessian_det(vc, s1, s2)
            ref = 1 + abs(k)
            _, _, (h11, h12, h22) = _grad_hess(vc, s1, s2)
            ref += (abs(h11) + 2 * abs(h12) + abs(h22)) / abs(v)
            rec.degenerate = mult > 1 or abs(h) <= deg_tol * ref
            rec.ambientDegenerate = rec.degenerate or abs(rec.ambientHessian) <= deg_tol * ref ** 2
            return rec

        for t, mult in roots:
            if abs(1 + t * t) <= tol_unit * (1 + abs(t) ** 2):
                records.append(CriticalPointRecord(sigma=None, tCoord=t, value=None, hessian=None,
                                                   ambientHessian=None, multiplicity=mult,
                                                   atInfinity=True))
                continue
            s1, s2 = _lift(t, prec)
            records.append(make(s1, s2, t, mult))
            records.append(make(-s1, -s2, t, mult))
        if inf_mult >= 1:
            one, zero = mpmath.mpc(1), mpmath.mpc(0)
            records.append(make(one, zero, "infinity", inf_mult))
            records.append(make(-one, zero, "infinity", inf_mult))

    if any(r.multiplicity > 1 for r in records):
        warnings.append("colliding critical points")
    if any(r.degenerate or r.ambientDegenerate for r in records if not r.onDivisor and not r.atInfinity):
        warnings.append("degenerate critical point")
    if any(r.onDivisor for r in records):
        warnings.append("critical point on the divisor")
    if any(r.atInfinity for r in records):
        warnings.append("critical point at infinity")
    return CriticalSet(lam=lam, precision=prec, records=records, warnings=warnings,
                       infinity_multiplicity=inf_mult)


def critical_points(p: Potential, lam, prec: int = 128) -> CriticalSet:
    _require_d2(p)
    prec = max(prec, 128)
    while True:
        try:
            return _solve(p, lam, prec)
        except CertificationError:
            if prec >= MAX_CRIT_PREC:
                raise
            prec *= 2


def hessian_at(p: Potential, lam, sigma: Sequence, prec: int = 128):
    _require_d2(p)
    with mpmath.workprec(prec):
        lam = _to_mp(lam, prec)
        s1, s2 = (_to_mp(x, prec) for x in sigma)
        vc = _eval_list(binary_coeffs(p), lam)
        v = _form_value(vc, s1, s2)
        if abs(v) <= mpmath.ldexp(_form_abs(vc, s1, s2), -(prec // 2)):
            raise DivisorError("V vanishes at sigma; the Hessian of log V is undefined")
        h, _ = _tangential_hessian(vc, s1, s2)
        return h


def ambient_hessian_at(p: Potential, lam, sigma: Sequence, prec: int = 128):
    _require_d2(p)
    with mpmath.workprec(prec):
        lam = _to_mp(lam, prec)
        s1, s2 = (_to_mp(x, prec) for x in sigma)
        vc = _eval_list(binary_coeffs(p), lam)
        if _form_value(vc, s1, s2) == 0:
            raise DivisorError("V vanishes at sigma")
        return _ambient_hessian_det(vc, s1, s2)


@dataclass
class AssumptionReport:
    a1: bool
    a2: bool
    a3: bool
    a4: bool
    divisorCount: int
    critCount: int
    eulerExpected: int
    critOnDivisor: bool = False
    details: list[str] = field(default_factory=list)

    def failed(self) -> list[str]:
        return [name for name, ok in (("A1", self.a1), ("A2", self.a2),
                                      ("A3", self.a3), ("A4", self.a4)) if not ok]


def divisor_points(p: Potential, lam, prec: int = 128) -> tuple[list[tuple[object, int]], int]:
    """Distinct roots of V(t,1) with multiplicities, and the multiplicity at t = infinity."""
    with mpmath.workprec(prec):
        lam = _to_mp(lam, prec)
        vc = _eval_list(binary_coeffs(p), lam)
        scale = max(abs(x) for x in vc)
        small = mpmath.ldexp(scale, -(3 * prec) // 4)
        deg = max(i for i, x in enumerate(vc) if abs(x) > small)
        trimmed = [x if abs(x) > small else mpmath.mpc(0) for x in vc[:deg + 1]]
        roots = find_roots(trimmed, prec).distinct() if deg >= 1 else []
        return roots, p.k - deg


def assumption_report(p: Potential, lam, prec: int = 128) -> AssumptionReport:
    _require_d2(p)
    details = []
    roots, inf_mult = divisor_points(p, lam, prec)
    with mpmath.workprec(prec):
        tol = mpmath.ldexp(1, -(prec // 2))
        squarefree = all(m == 1 for _, m in roots) and inf_mult <= 1
        smooth = True
        dcount = 0
        for t, m in roots:
            if abs(1 + t * t) <= tol * (1 + abs(t) ** 2):
                continue
            dcount += 2
            if m > 1:
                smooth = False
        if inf_mult >= 1:
            dcount += 2
            if inf_mult > 1:
                smooth = False
    if not squarefree:
        details.append("V(t,1) is not squarefree")
    if not smooth:
        details.append("the divisor on the circle is singular")
    try:
        cs = critical_points(p, lam, prec)
    except ValueError as exc:
        details.append(str(exc))
        return AssumptionReport(False, smooth, False, False, dcount, -1, dcount, False, details)
    pts = cs.points
    nondeg = all(not r.degenerate and not r.ambientDegenerate for r in pts)
    if not nondeg:
        details.append("degenerate critical point")
    on_div = any(r.onDivisor for r in cs.records)
    if on_div:
        details.append("critical point on the divisor")
    crit_count = len(pts)
    return AssumptionReport(a1=squarefree, a2=smooth, a3=nondeg, a4=crit_count == dcount,
                            divisorCount=dcount, critCount=crit_count, eulerExpected=dcount,
                            critOnDivisor=on_div, details=details)


# --- exact discriminant indicators -------------------------------------------

def _det(m: list[list[Fraction]]) -> Fraction:
    m = [row[:] for row in m]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv
            if f:
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return det


def _interpolate(xs: list[int], ys: list[Fraction]) -> LambdaPoly:
    """Newton divided differences, expanded to the monomial basis."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    out = LambdaPoly.constant(coef[-1])
    for i in range(n - 2, -1, -1):
        out = out * LambdaPoly([-xs[i], 1]) + coef[i]
    return out


def form_resultant(f: list[LambdaPoly], g: list[LambdaPoly]) -> LambdaPoly:
    """Resultant of two binary forms (coefficient i multiplies x1^i) over Q[lambda]."""
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    if size == 0:
        return LambdaPoly.constant(1)
    rows = []
    for r in range(n):
        rows.append([None] * r + list(reversed(f)) + [None] * (n - 1 - r))
    for r in range(m):
        rows.append([None] * r + list(reversed(g)) + [None] * (m - 1 - r))
    bound = sum(max((e.degree for e in row if e is not None and not e.is_zero()), default=0)
                for row in rows)
    xs = list(range(bound + 1))
    ys = []
    for x in xs:
        mat = [[e(x) if e is not None else Fraction(0) for e in row] for row in rows]
        ys.append(_det(mat))
    return _interpolate(xs, ys)


def _sparse_form(cs: list[LambdaPoly]) -> SparsePoly:
    deg = len(cs) - 1
    return SparsePoly(2, {(i, deg - i): c for i, c in enumerate(cs)})


def indicator_polynomials(p: Potential) -> dict[str, LambdaPoly]:
    """Polynomials in lambda whose zeros contain every degeneration point."""
    _require_d2(p)
    k = p.k
    V = p.as_sparse()
    g = _sparse_form(g_coeffs(p))
    V1, V2 = V.derivative(0), V.derivative(1)
    out = {"disc_V": form_resultant(form_coeffs(V1, k - 1), form_coeffs(V2, k - 1))}
    if not g.terms:
        return out
    g1, g2 = g.derivative(0), g.derivative(1)
    out["disc_g"] = form_resultant(form_coeffs(g1, k - 1), form_coeffs(g2, k - 1))
    gc = form_coeffs(g, k)
    out["res_V_g"] = form_resultant(binary_coeffs(p), gc)
    q = SparsePoly(2, {(2, 0): LambdaPoly.constant(1), (0, 2): LambdaPoly.constant(1)})
    out["res_g_q"] = form_resultant(gc, form_coeffs(q, 2))
    H11, H12, H22 = V1.derivative(0), V1.derivative(1), V2.derivative(1)
    det_h = H11 * H22 - H12 * H12
    x1 = SparsePoly(2, {(1, 0): LambdaPoly.constant(1)})
    x2 = SparsePoly(2, {(0, 1): LambdaPoly.constant(1)})
    xadjx = H22 * x1 * x1 - (H12 * x1 * x2).scale(2) + H11 * x2 * x2
    N = det_h * q * q - (V * xadjx).scale(k * k)
    if N.terms:
        out["res_g_hess"] = form_resultant(gc, form_coeffs(N, 2 * k))
    return out


@dataclass
class DiscriminantPoint:
    lam: object
    tags: list[str]
    sources: list[str]

    def __complex__(self) -> complex:
        return complex(self.lam)


def discriminant_scan(p: Potential, window: Sequence[float], resolution: int = 200,
                      prec: int = 128) -> list[DiscriminantPoint]:
    """Degeneration points of (A1)-(A4) inside window = (a_min, a_max, b_min, b_max).

    Candidates are the zeros of exact indicator polynomials (discriminants and
    resultants built from V and g); each is confirmed, and tagged, by an
    assumption report evaluated at the candidate.
    """
    amin, amax, bmin, bmax = (float(x) for x in window)
    merge = max(amax - amin, bmax - bmin) / max(resolution, 1) * 1e-3
    candidates: list[tuple[object, str]] = []
    for name, poly in indicator_polynomials(p).items():
        if poly.is_zero() or poly.degree < 1:
            continue
        for z, _ in find_roots(poly, max(prec, 4 * poly.degree)).distinct():
            if amin - 1e-12 <= float(z.real) <= amax + 1e-12 and bmin - 1e-12 <= float(z.imag) <= bmax + 1e-12:
                candidates.append((z, name))
    groups: list[tuple[object, list[str]]] = []
    for z, name in sorted(candidates, key=lambda t: (float(t[0].real), float(t[0].imag))):
        for i, (z0, names) in enumerate(groups):
            if abs(z - z0) <= merge:
                if name not in names:
                    names.append(name)
                break
        else:
            groups.append((z, [name]))
    out = []
    for z, names in groups:
        if abs(z.imag) <= mpmath.ldexp(1, -(prec // 2)) * (1 + abs(z)):
            with mpmath.workprec(prec):
                z = mpmath.mpc(z.real, 0)
        rep = assumption_report(p, z, prec)
        tags = rep.failed()
        if tags:
            out.append(DiscriminantPoint(z, tags, sorted(names)))
    return out
