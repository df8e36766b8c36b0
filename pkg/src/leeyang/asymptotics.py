"""Finite-n checks of the stationary-phase shape of the sphere integral.

I_n grows like rho*^{nK} n^{-(d-1)/2} where rho* is the dominant critical
modulus.  The constant in front is fitted, never computed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .algebra import eval_complex, to_mpc
from .critical import critical_points
from .moment_engine import compute_an, sphere_prefactor
from .potential import Potential

REAL = "real"
ALL = "all"


def _is_real(lam) -> bool:
    if isinstance(lam, (int, Fraction, float)):
        return True
    return mpmath.mpc(lam).imag == 0


def _real_point(r, prec: int) -> bool:
    tol = mpmath.ldexp(1, -(prec // 2))
    return all(abs(mpmath.mpc(x).imag) <= tol for x in r.sigma)


def dominant_points(p: Potential, lam, mode: str = "auto", prec: int = 128):
    """(rho*, dominant records) over crit(F_lambda).

    mode "real" restricts to real critical points, which is what governs a
    positive integrand on the real circle; "auto" picks it for real lambda.
    """
    if mode == "auto":
        mode = REAL if _is_real(lam) else ALL
    cs = critical_points(p, lam, prec)
    pts = [r for r in cs.points if mode == ALL or _real_point(r, prec)]
    if not pts:
        raise ValueError(f"no {'real ' if mode == REAL else ''}critical points at lambda={lam}")
    with mpmath.workprec(prec):
        mods = [abs(r.value) for r in pts]
        top = max(mods)
        tie = top * (1 - mpmath.ldexp(1, -(prec // 2)))
        return top, [r for r, m in zip(pts, mods) if m >= tie]


def _sphere_values(p: Potential, lam, ns: Sequence[int], prec: int) -> list:
    out = []
    for n in ns:
        if not p.admissible(n):
            raise ValueError(f"n={n} is not admissible for k={p.k}")
        an = compute_an(p, n)
        with mpmath.workprec(prec + 20):
            if isinstance(lam, (int, Fraction)):
                val = mpmath.mpf(an(Fraction(lam)).numerator) / an(Fraction(lam)).denominator
            else:
                val, _ = eval_complex(an, to_mpc(lam, prec + 20), prec + 20)
            out.append(val / sphere_prefactor(p, n, prec + 20))
    return out


@dataclass
class GrowthReport:
    lam: object
    rhoStar: float
    dominance: str
    dominantCount: int
    n: list[int]
    r: list[float]
    relError: list[float]
    order: float | None
    integrals: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {"lambda": str(self.lam), "rho_star": self.rhoStar, "dominance": self.dominance,
                "dominant_count": self.dominantCount, "n": self.n, "r_n": self.r,
                "relative_error": self.relError, "convergence_order": self.order}


def growth_rate(p: Potential, lam, nRange: Sequence[int], prec: int = 128,
                mode: str = "auto") -> GrowthReport:
    """r_n = |I_n|^{1/(nK)} against the dominant critical modulus."""
    ns = [int(n) for n in nRange]
    if not ns:
        raise ValueError("empty nRange")
    mode = (REAL if _is_real(lam) else ALL) if mode == "auto" else mode
    rho, dom = dominant_points(p, lam, mode, prec)
    vals = _sphere_values(p, lam, ns, prec)
    if all(v == 0 for v in vals):
        raise ValueError("A_n vanishes for every requested n")
    rs, errs = [], []
    with mpmath.workprec(prec):
        for n, v in zip(ns, vals):
            nK = n * p.K
            if v == 0 or nK == 0:
                rs.append(float("nan"))
                errs.append(float("nan"))
                continue
            r = mpmath.power(abs(v), 1 / mpmath.mpf(nK.numerator) * nK.denominator)
            rs.append(float(r))
            errs.append(float(abs(r - rho) / rho))
    good = [(n, e) for n, e in zip(ns, errs) if n > 0 and e > 0 and math.isfinite(e)]
    order = None
    if len(good) >= 2:
        x = np.log([n for n, _ in good])
        y = np.log([e for _, e in good])
        order = float(np.polyfit(x, y, 1)[0])
    return GrowthReport(lam, float(rho), mode, len(dom), ns, rs, errs, order, vals)


@dataclass
class ExponentReport:
    lam: object
    slope: float
    intercept: float
    residual: float
    expected: float
    n: list[int]
    y: list[float]

    def to_json(self) -> dict:
        return {"lambda": str(self.lam), "slope": self.slope, "intercept": self.intercept,
                "residual": self.residual, "expected": self.expected, "n": self.n, "y": self.y}


def correction_exponent(p: Potential, lam, nRange: Sequence[int], prec: int = 128) -> ExponentReport:
    """Least-squares slope of log|I_n| - nK log rho* against log n."""
    ns = [int(n) for n in nRange]
    if len(ns) < 3:
        raise ValueError("the fit needs at least three values of n")
    if any(n <= 0 for n in ns):
        raise ValueError("n must be positive")
    lam_q = Fraction(lam) if isinstance(lam, (int, Fraction, str)) else lam
    if not _is_real(lam_q):
        raise ValueError("correction_exponent expects real lambda")
    rho, _ = dominant_points(p, lam_q, REAL, prec)
    vals = _sphere_values(p, lam_q, ns, prec)
    ys = []
    with mpmath.workprec(prec):
        for n, v in zip(ns, vals):
            if v == 0:
                raise ValueError(f"I_{n} vanishes; lambda is not in the Laplace regime")
            nK = n * p.K
            ys.append(float(mpmath.log(abs(v)) - mpmath.mpf(nK.numerator) / nK.denominator * mpmath.log(rho)))
    x = np.log(ns)
    coef, res, *_ = np.polyfit(x, ys, 1, full=True)
    rms = float(math.sqrt(res[0] / len(ns))) if len(res) else 0.0
    return ExponentReport(lam, float(coef[0]), float(coef[1]), rms, -(p.d - 1) / 2, ns, ys)


@dataclass
class PhaseTransition:
    lam: float
    left: int
    right: int
    leftValue: float
    rightValue: float

    def __float__(self) -> float:
        return self.lam


def _state(p: Potential, lam, prec: int):
    cs = critical_points(p, lam, prec)
    real = [r for r in cs.points if _real_point(r, prec)]
    if not real:
        return None
    with mpmath.workprec(prec):
        mods = [abs(r.value) for r in real]
        top = max(mods)
        tie = top * (1 - mpmath.ldexp(1, -(prec // 2)))
    pts = np.array([[float(mpmath.mpc(x).real) for x in r.sigma] for r in real])
    dom = np.array([m >= tie for m in mods])
    return pts, dom, float(top)


def _same(a, b) -> bool:
    """Does the dominant set of state a continue to the dominant set of b?"""
    if a is None or b is None:
        return a is None and b is None
    pa, da, _ = a
    pb, db, _ = b
    if da.sum() != db.sum():
        return False
    rest = pb[~db]
    for q in pa[da]:
        near = np.hypot(*(pb[db] - q).T).min()
        if rest.size and near >= np.hypot(*(rest - q).T).min():
            return False
    return True


def real_phase_transitions(p: Potential, interval: Sequence, samples: int = 200,
                           prec: int = 128, iters: int = 60) -> list[PhaseTransition]:
    """Points of the real interval where the dominant real critical point changes."""
    if p.d != 2:
        raise ValueError("real_phase_transitions needs d = 2")
    lo, hi = (float(Fraction(x)) for x in interval)
    grid = np.linspace(lo, hi, max(samples, 2))
    states = [_state(p, mpmath.mpf(x), prec) for x in grid]
    out = []
    for i in range(len(grid) - 1):
        left, right = states[i], states[i + 1]
        if _same(left, right):
            continue
        a, b = grid[i], grid[i + 1]
        sa = left
        by_count = left is not None and right is not None and left[1].sum() != right[1].sum()
        for _ in range(iters):
            mid = (a + b) / 2
            if mid in (a, b):
                break
            sm = _state(p, mpmath.mpf(mid), prec)
            if by_count:
                stay = sm is not None and sm[1].sum() == left[1].sum()
            else:
                stay = _same(sa, sm)
            if stay:
                a, sa = mid, sm
            else:
                b = mid
        out.append(PhaseTransition(
            lam=float((a + b) / 2),
            left=int(left[1].sum()) if left else 0,
            right=int(right[1].sum()) if right else 0,
            leftValue=left[2] if left else float("nan"),
            rightValue=right[2] if right else float("nan")))
    return out
