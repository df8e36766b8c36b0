"""Aberth-Ehrlich simultaneous root finding with inclusion-disc certification."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .algebra import LambdaPoly, as_rational

MAX_PREC = 2048
GOLDEN_ANGLE = math.pi * (3 - math.sqrt(5))


class RootFindingError(RuntimeError):
    pass


@dataclass
class Cluster:
    center: mpmath.mpc
    multiplicity: int
    members: list[int]
    radius: mpmath.mpf


@dataclass
class RootSet:
    roots: list
    residuals: list
    radii: list
    precisionBits: int
    polynomialDegree: int
    clusters: list[Cluster] = field(default_factory=list)
    certified: bool = True
    iterations: int = 0

    def distinct(self) -> list[tuple[mpmath.mpc, int]]:
        """Distinct roots with multiplicities, clusters merged."""
        out = []
        in_cluster = set()
        for c in self.clusters:
            out.append((c.center, c.multiplicity))
            in_cluster.update(c.members)
        for i, z in enumerate(self.roots):
            if i not in in_cluster:
                out.append((z, 1))
        return sorted(out, key=lambda t: (float(t[0].real), float(t[0].imag)))

    def as_complex(self) -> list[complex]:
        return [complex(z) for z in self.roots]


def _normalize(coeffs) -> list:
    if isinstance(coeffs, LambdaPoly):
        return list(coeffs.coeffs)
    out = []
    for c in coeffs:
        if isinstance(c, (int, Fraction, str)):
            out.append(as_rational(c))
        else:
            out.append(c)
    return out


def _to_mp(c):
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    return mpmath.mpc(c)


def _is_zero(c) -> bool:
    return c == 0


def _horner(a: list, z):
    """p(z), p'(z) and the running error magnitude sum."""
    p = a[-1]
    dp = mpmath.mpc(0)
    mu = abs(p)
    az = abs(z)
    for c in reversed(a[:-1]):
        dp = dp * z + p
        p = p * z + c
        mu = mu * az + abs(p)
    return p, dp, mu


def _start_points(a: list, n: int) -> list:
    """Cauchy-bound circle with a golden-angle offset."""
    lead = a[-1]
    cauchy = 1 + max(abs(c / lead) for c in a[:-1])
    return [cauchy * mpmath.expj(2 * mpmath.pi * j / n + GOLDEN_ANGLE / n + 0.4)
            for j in range(n)]


def _newton_ratio_double(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    """p(z)/p'(z) in double precision without overflow.

    For |z| > 1 the reversed polynomial is evaluated at 1/z instead.
    """
    n = len(c) - 1
    out = np.empty_like(z)
    inner = np.abs(z) <= 1
    if inner.any():
        zi = z[inner]
        p = np.full_like(zi, c[-1])
        dp = np.zeros_like(zi)
        for coef in c[-2::-1]:
            dp = dp * zi + p
            p = p * zi + coef
        out[inner] = p / dp
    outer = ~inner
    if outer.any():
        y = 1 / z[outer]
        q = np.full_like(y, c[0])
        dq = np.zeros_like(y)
        for coef in c[1:]:
            dq = dq * y + q
            q = q * y + coef
        # p(z) = z^n q(y), p'(z) = z^(n-1) (n q(y) - y q'(y))
        out[outer] = z[outer] * q / (n * q - y * dq)
    return out


def _aberth_double(a: list, z0: list, max_iter: int) -> list | None:
    """Vectorized Jacobi-style Aberth sweep in complex128; a warm start only."""
    scale = max(abs(c) for c in a)
    c = np.array([complex(c_ / scale) for c_ in a], dtype=complex)
    if not np.isfinite(c).all() or c[-1] == 0:
        return None
    z = np.array([complex(x) for x in z0], dtype=complex)
    n = len(z)
    eye = np.eye(n, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            ratio = _newton_ratio_double(c, z)
            diff = z[:, None] - z[None, :]
            diff[eye] = 1
            inv = 1 / diff
            inv[eye] = 0
            w = ratio / (1 - ratio * inv.sum(axis=1))
            if not np.isfinite(w).all():
                return None
            z = z - w
            if np.all(np.abs(w) < 1e-13 * (1 + np.abs(z))):
                break
    if not np.isfinite(z).all():
        return None
    return list(z)


def _aberth(a: list, prec: int, max_iter: int, z0: list | None = None):
    n = len(a) - 1
    with mpmath.workprec(prec):
        z = [mpmath.mpc(x) for x in z0] if z0 is not None else _start_points(a, n)
        tol = mpmath.ldexp(1, -(prec // 2))
        u = mpmath.ldexp(1, 1 - prec)
        done = [False] * n
        it = 0
        for it in range(1, max_iter + 1):
            evals = [_horner(a, zi) for zi in z]
            new = list(z)
            for i in range(n):
                if done[i]:
                    continue
                p, dp, mu = evals[i]
                if abs(p) <= 12 * u * mu:
                    done[i] = True
                    continue
                if dp == 0:
                    new[i] = z[i] + tol * (1 + abs(z[i]))
                    continue
                ratio = p / dp
                s = mpmath.fsum(1 / (z[i] - z[j]) for j in range(n) if j != i and z[i] != z[j])
                w = ratio / (1 - ratio * s)
                new[i] = z[i] - w
                if abs(w) < tol * (1 + abs(z[i])):
                    done[i] = True
            z = new
            if all(done):
                return z, it, True
        return z, it, False


def _inclusion(a: list, z: list, prec: int):
    """Residuals and Weierstrass inclusion radii n|W_i| (plus rounding slack)."""
    n = len(z)
    with mpmath.workprec(prec):
        u = mpmath.ldexp(1, 1 - prec)
        res, radii = [], []
        for i, zi in enumerate(z):
            p, _, mu = _horner(a, zi)
            err = 12 * u * mu
            den = abs(a[-1])
            for j in range(n):
                if j != i:
                    den *= abs(zi - z[j])
            res.append(abs(p))
            if den == 0:
                radii.append(mpmath.inf)
            else:
                radii.append(n * (abs(p) + err) / den)
        return res, radii


def _clusters(z: list, radii: list) -> list[list[int]]:
    n = len(z)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) <= radii[i] + radii[j]:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [g for g in groups.values() if len(g) > 1]


def _derivative(a: list, m: int) -> list:
    out = list(a)
    for _ in range(m):
        out = [i * out[i] for i in range(1, len(out))]
    return out


def _refine_multiple(a: list, start, m: int, prec: int):
    """Newton on the (m-1)-th derivative, which has a simple root there."""
    da = _derivative(a, m - 1)
    with mpmath.workprec(prec):
        z = mpmath.mpc(start)
        tol = mpmath.ldexp(1, -(prec - 8))
        for _ in range(100):
            p, dp, _ = _horner(da, z)
            if dp == 0:
                break
            step = p / dp
            z -= step
            if abs(step) <= tol * (1 + abs(z)):
                break
        return z


def find_roots(coeffs, precisionBits: int | None = None, max_iter: int | None = None) -> RootSet:
    """All complex roots of sum_i coeffs[i] * x^i (ascending order)."""
    a = _normalize(coeffs)
    while a and _is_zero(a[-1]):
        a.pop()
    if not a:
        raise ValueError("the zero polynomial has no finite root set")
    deg = len(a) - 1
    if deg < 1:
        raise ValueError("constant polynomial has no roots")
    zeros_at_origin = 0
    while _is_zero(a[zeros_at_origin]):
        zeros_at_origin += 1
    core = a[zeros_at_origin:]
    prec = precisionBits or max(128, 4 * deg)
    max_iter = max_iter or (200 + 20 * deg)
    while True:
        with mpmath.workprec(prec):
            mp_core = [_to_mp(c) for c in core]
        if len(core) > 1:
            with mpmath.workprec(prec):
                start = _start_points(mp_core, len(core) - 1)
            warm = _aberth_double(mp_core, start, max_iter) if len(core) > 2 else None
            z, iters, ok = _aberth(mp_core, prec, max_iter, warm)
            if not ok and warm is not None:
                z, iters, ok = _aberth(mp_core, prec, max_iter)
        else:
            z, iters, ok = [], 0, True
        if ok:
            break
        if prec >= MAX_PREC:
            raise RootFindingError(f"Aberth iteration did not converge at {prec} bits")
        prec *= 2
    with mpmath.workprec(prec):
        mp_full = [_to_mp(c) for c in a]
        mp_core = [_to_mp(c) for c in core]
        if len(z) > 1:
            res, radii = _inclusion(mp_core, z, prec)
        elif z:
            p0, _, mu0 = _horner(mp_core, z[0])
            res, radii = [abs(p0)], [abs(p0) + 12 * mpmath.ldexp(1, 1 - prec) * mu0]
            radii[0] = radii[0] / abs(mp_core[-1])
        else:
            res, radii = [], []
        groups = _clusters(z, radii)
        clusters = []
        for g in groups:
            m = len(g)
            center = _refine_multiple(mp_core, sum(z[i] for i in g) / m, m, prec)
            rad = max(abs(z[i] - center) + radii[i] for i in g)
            clusters.append(Cluster(center, m, [i + zeros_at_origin for i in sorted(g)], rad))
        if zeros_at_origin > 1:
            clusters.insert(0, Cluster(mpmath.mpc(0), zeros_at_origin,
                                       list(range(zeros_at_origin)), mpmath.mpf(0)))
        z = [mpmath.mpc(0)] * zeros_at_origin + list(z)
        res = [mpmath.mpf(0)] * zeros_at_origin + res
        radii = [mpmath.mpf(0)] * zeros_at_origin + radii
        # certification: small relative residual at every root
        u = mpmath.ldexp(1, -(prec // 2))
        certified = True
        for i, zi in enumerate(z):
            _, _, mu = _horner(mp_full, zi)
            if res[i] > u * mu:
                certified = False
    return RootSet(roots=z, residuals=res, radii=radii, precisionBits=prec,
                   polynomialDegree=deg, clusters=clusters, certified=certified,
                   iterations=iters)


@dataclass
class SymmetryReport:
    symmetry: str
    matched: bool
    unmatched: list


def root_symmetry_check(rs: RootSet, symmetry: str) -> SymmetryReport:
    if symmetry not in ("conjugation", "inversion"):
        raise ValueError("symmetry must be 'conjugation' or 'inversion'")
    with mpmath.workprec(rs.precisionBits):
        base_tol = mpmath.ldexp(1, -(rs.precisionBits // 4))
        used = [False] * len(rs.roots)
        unmatched = []
        for i, z in enumerate(rs.roots):
            if symmetry == "conjugation":
                img, r_img = mpmath.conj(z), rs.radii[i]
            else:
                if z == 0:
                    unmatched.append(z)
                    continue
                img = 1 / z
                r_img = rs.radii[i] / abs(z) ** 2
            best, best_j = None, None
            for j, w in enumerate(rs.roots):
                if used[j]:
                    continue
                dist = abs(w - img)
                if best is None or dist < best:
                    best, best_j = dist, j
            tol = max(10 * (r_img + rs.radii[best_j]), base_tol * (1 + abs(img)))
            if best is not None and best <= tol:
                used[best_j] = True
            else:
                unmatched.append(z)
    return SymmetryReport(symmetry, not unmatched, unmatched)


def companion_roots(coeffs: Sequence) -> list[complex]:
    """Double-precision companion-matrix eigenvalues; a low-precision oracle."""
    a = [complex(c) if not isinstance(c, Fraction) else float(c) for c in _normalize(coeffs)]
    while a and a[-1] == 0:
        a.pop()
    return list(np.roots(a[::-1]))
