"""Branch-continued critical values on a lambda grid, Stokes and anti-Stokes
curves, and the accumulation of zeros onto anti-Stokes segments.

Grid work is done in complex128; exactness lives elsewhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage
from scipy.optimize import linear_sum_assignment

from .algebra import LambdaPoly, SparsePoly
from .critical import binary_coeffs, g_coeffs
from .moment_engine import compute_an
from .potential import Potential
from .rootfinder import find_roots

ANTI_STOKES = "antiStokes"
STOKES = "stokes"
REFINE_TOL = 1e-10


class LandscapeError(RuntimeError):
    pass


def _polyval(c: LambdaPoly, lam: np.ndarray) -> np.ndarray:
    out = np.zeros_like(lam)
    for coef in reversed(c.coeffs):
        out = out * lam + float(coef)
    return out


class CriticalBatch:
    """Vectorized critical points and values of a d=2 potential."""

    def __init__(self, p: Potential):
        if p.d != 2:
            raise ValueError("landscape needs d = 2")
        p.require_valid()
        self.k = p.k
        self.vc = binary_coeffs(p)
        self.gc = g_coeffs(p)
        nz = [i for i, c in enumerate(self.gc) if not c.is_zero()]
        if not nz:
            raise LandscapeError("critical locus is not finite")
        self.deg = max(nz)
        self.with_infinity = self.deg < self.k
        self.m = 2 * self.deg + (2 if self.with_infinity else 0)

    def __call__(self, lam: np.ndarray):
        """Return points (N, m, 2), values (N, m) and an ok mask (N,)."""
        lam = np.asarray(lam, dtype=complex).ravel()
        N, D, k = lam.size, self.deg, self.k
        G = np.stack([_polyval(c, lam) for c in self.gc])
        Vc = np.stack([_polyval(c, lam) for c in self.vc])
        scale = np.abs(G).max(axis=0)
        lead = G[D]
        ok = np.abs(lead) > 1e-12 * np.maximum(scale, 1e-300)
        safe_lead = np.where(ok, lead, 1.0)
        pts = []
        if D >= 1:
            comp = np.zeros((N, D, D), dtype=complex)
            if D > 1:
                idx = np.arange(D - 1)
                comp[:, idx + 1, idx] = 1.0
            comp[:, :, -1] = -(G[:D] / safe_lead).T
            with np.errstate(all="ignore"):
                t = np.linalg.eigvals(comp)
                s = 1 + t * t
                ok &= np.all(np.abs(s) > 1e-9, axis=1) & np.all(np.isfinite(t), axis=1)
                x2 = 1 / np.sqrt(np.where(np.abs(s) > 0, s, 1.0))
                x1 = t * x2
            for r in range(D):
                pts.append(np.stack([x1[:, r], x2[:, r]], axis=-1))
                pts.append(np.stack([-x1[:, r], -x2[:, r]], axis=-1))
        if self.with_infinity:
            one = np.ones(N, dtype=complex)
            zero = np.zeros(N, dtype=complex)
            pts.append(np.stack([one, zero], axis=-1))
            pts.append(np.stack([-one, zero], axis=-1))
        P = np.stack(pts, axis=1)
        X1, X2 = P[..., 0], P[..., 1]
        vals = np.zeros(X1.shape, dtype=complex)
        with np.errstate(all="ignore"):
            for i in range(k + 1):
                vals += Vc[i][:, None] * X1 ** i * X2 ** (k - i)
        ok &= np.all(np.isfinite(vals), axis=1) & np.all(vals != 0, axis=1)
        return P, vals, ok


def _point_cost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise distances between point sets (..., m, 2) -> (..., m, m)."""
    d = a[..., :, None, :] - b[..., None, :, :]
    return np.sqrt((np.abs(d) ** 2).sum(axis=-1))


def _min_separation(P: np.ndarray) -> np.ndarray:
    c = _point_cost(P, P)
    m = P.shape[-2]
    c[..., np.arange(m), np.arange(m)] = np.inf
    return c.min(axis=(-1, -2))


@dataclass
class BranchField:
    window: tuple[float, float, float, float]
    resolution: tuple[int, int]
    a: np.ndarray
    b: np.ndarray
    points: np.ndarray
    values: np.ndarray
    resolved: np.ndarray
    classes: list[int]
    potential: Potential = field(repr=False)
    seed: tuple[int, int] = (0, 0)

    @property
    def m(self) -> int:
        return self.values.shape[-1]

    @property
    def unresolved(self) -> set[tuple[int, int]]:
        return {tuple(x) for x in np.argwhere(~self.resolved).tolist()}

    @property
    def lam(self) -> np.ndarray:
        return self.a[None, :] + 1j * self.b[:, None]

    def class_of(self, i: int) -> int:
        return self.classes[i]

    def branch_near(self, lam: complex, sigma: Sequence[complex]) -> int:
        """Class representative of the branch whose point is nearest sigma or -sigma."""
        grid = self.lam
        dist = np.abs(grid - lam)
        dist[~self.resolved] = np.inf
        r, c = np.unravel_index(np.argmin(dist), dist.shape)
        s = np.asarray(sigma, dtype=complex)
        P = self.points[r, c]
        d = np.minimum(np.linalg.norm(P - s, axis=1), np.linalg.norm(P + s, axis=1))
        return self.classes[int(np.argmin(d))]


def _layers(nb: int, na: int, seed: tuple[int, int]):
    rr, cc = np.meshgrid(np.arange(nb), np.arange(na), indexing="ij")
    dist = np.abs(rr - seed[0]) + np.abs(cc - seed[1])
    # parent: step toward the seed along the axis with the larger offset
    dr, dc = seed[0] - rr, seed[1] - cc
    step_r = np.abs(dr) >= np.abs(dc)
    pr = np.where(step_r, rr + np.sign(dr), rr)
    pc = np.where(step_r, cc, cc + np.sign(dc))
    order = np.argsort(dist, axis=None, kind="stable")
    dist_flat = dist.ravel()[order]
    bounds = np.searchsorted(dist_flat, np.arange(dist_flat.max() + 2))
    return order, bounds, pr.ravel(), pc.ravel()


def build_branch_field(p: Potential, window: Sequence[float], resolution) -> BranchField:
    """Critical values on a grid with a globally continued branch labelling."""
    amin, amax, bmin, bmax = (float(x) for x in window)
    if isinstance(resolution, int):
        na = nb = resolution
    else:
        na, nb = resolution
    a = np.linspace(amin, amax, na) if na > 1 else np.array([(amin + amax) / 2])
    b = np.linspace(bmin, bmax, nb) if nb > 1 else np.array([(bmin + bmax) / 2])
    lam = a[None, :] + 1j * b[:, None]
    batch = CriticalBatch(p)
    P, vals, ok = batch(lam)
    m = batch.m
    P = P.reshape(nb, na, m, 2)
    vals = vals.reshape(nb, na, m)
    ok = ok.reshape(nb, na)
    if not ok.any():
        raise LandscapeError("no grid node could be resolved; refine the grid or move the window")

    sep = _min_separation(P.reshape(-1, m, 2)).reshape(nb, na)
    sep_masked = np.where(ok, sep, -np.inf)
    seed = np.unravel_index(np.argmax(sep_masked), sep.shape)
    # deterministic initial order at the seed: by (Re t, Im t) via x1/x2
    P_flat = P.reshape(nb * na, m, 2).copy()
    V_flat = vals.reshape(nb * na, m).copy()
    resolved = ok.ravel().copy()
    order, bounds, pr, pc = _layers(nb, na, seed)
    parent = pr * na + pc

    for L in range(1, len(bounds) - 1):
        idx = order[bounds[L]:bounds[L + 1]]
        if idx.size == 0:
            continue
        par = parent[idx]
        cost = _point_cost(P_flat[par], P_flat[idx])
        bad = ~np.isfinite(cost)
        cost = np.where(bad, 1e300, cost)
        perm = np.argmin(cost, axis=2)
        is_perm = np.all(np.sort(perm, axis=1) == np.arange(m), axis=1)
        for q in np.nonzero(~is_perm)[0]:
            _, col = linear_sum_assignment(cost[q])
            perm[q] = col
        rows = np.arange(idx.size)[:, None]
        P_flat[idx] = P_flat[idx][rows, perm]
        V_flat[idx] = V_flat[idx][rows, perm]
        jump = np.take_along_axis(cost, perm[:, :, None], axis=2)[:, :, 0].max(axis=1)
        margin = sep.ravel()[idx]
        resolved[idx] &= margin >= 2 * jump

    P = P_flat.reshape(nb, na, m, 2)
    vals = V_flat.reshape(nb, na, m)
    resolved = resolved.reshape(nb, na)
    classes = _value_classes(vals, resolved)
    return BranchField(window=(amin, amax, bmin, bmax), resolution=(na, nb), a=a, b=b,
                       points=P, values=vals, resolved=resolved, classes=classes,
                       potential=p, seed=(int(seed[0]), int(seed[1])))


def _value_classes(vals: np.ndarray, resolved: np.ndarray) -> list[int]:
    m = vals.shape[-1]
    v = vals[resolved]
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if v.size:
        for i in range(m):
            for j in range(i + 1, m):
                same = np.abs(v[:, i] - v[:, j]) <= 1e-9 * (np.abs(v[:, i]) + np.abs(v[:, j]))
                if same.mean() >= 0.99:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[max(ri, rj)] = min(ri, rj)
    return [find(i) for i in range(m)]


@dataclass
class Polyline:
    pair: tuple[int, int]
    kind: str
    vertices: np.ndarray
    residuals: np.ndarray
    closed: bool = False

    def to_json(self) -> dict:
        return {"pair": list(self.pair), "kind": self.kind, "closed": self.closed,
                "vertices": [[float(x), float(y)] for x, y in self.vertices]}


@dataclass
class CurveSet:
    polylines: list[Polyline]
    window: tuple[float, float, float, float]
    resolution: tuple[int, int]
    dropped_vertices: int = 0

    def select(self, pair: tuple[int, int] | None = None, kind: str | None = None) -> CurveSet:
        keep = []
        for pl in self.polylines:
            if kind is not None and pl.kind != kind:
                continue
            if pair is not None and tuple(sorted(pair)) != tuple(sorted(pl.pair)):
                continue
            keep.append(pl)
        return CurveSet(keep, self.window, self.resolution, 0)

    def pairs(self, kind: str | None = None) -> list[tuple[int, int]]:
        return sorted({pl.pair for pl in self.polylines if kind is None or pl.kind == kind})

    def vertices(self) -> np.ndarray:
        if not self.polylines:
            return np.zeros((0, 2))
        return np.concatenate([pl.vertices for pl in self.polylines])

    def residuals(self) -> np.ndarray:
        if not self.polylines:
            return np.zeros(0)
        return np.concatenate([pl.residuals for pl in self.polylines])

    def __len__(self) -> int:
        return len(self.polylines)

    def to_json(self) -> dict:
        return {"window": list(self.window), "resolution": list(self.resolution),
                "dropped_vertices": self.dropped_vertices,
                "polylines": [pl.to_json() for pl in self.polylines]}


def _pair_field(kind: str, vi: np.ndarray, vj: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        if kind == ANTI_STOKES:
            return np.log(np.abs(vi)) - np.log(np.abs(vj))
        return np.angle(vi * np.conj(vj))


def _edge_consistent(points: np.ndarray, u: tuple, w: tuple) -> np.ndarray:
    """Per-branch continuity across the edges u -> w; shape (..., m).

    Compared on critical points rather than values: near a collision the
    points separate like a square root while the values merge faster.
    """
    d = _point_cost(points[u], points[w])
    m = d.shape[-1]
    d_same = d[..., np.arange(m), np.arange(m)]
    d_other = d.copy()
    d_other[..., np.arange(m), np.arange(m)] = np.inf
    return d_same <= 0.5 * d_other.min(axis=-1)


def _march(g: np.ndarray, node_ok: np.ndarray, h_ok: np.ndarray, v_ok: np.ndarray):
    """Marching squares; returns segments as pairs of edge ids.

    Edge ids: horizontal edge (r, c)-(r, c+1) is r*(na-1)+c; vertical edge
    (r, c)-(r+1, c) is nb*(na-1) + r*na + c.
    """
    nb, na = g.shape
    pos = g > 0
    h_cross = h_ok & (pos[:, :-1] != pos[:, 1:])
    v_cross = v_ok & (pos[:-1, :] != pos[1:, :])
    cell_ok = (node_ok[:-1, :-1] & node_ok[:-1, 1:] & node_ok[1:, :-1] & node_ok[1:, 1:]
               & h_ok[:-1, :] & h_ok[1:, :] & v_ok[:, :-1] & v_ok[:, 1:])
    off = nb * (na - 1)
    rr, cc = np.nonzero(cell_ok)
    segs = []
    if rr.size == 0:
        return segs, h_cross, v_cross
    e_bottom = rr * (na - 1) + cc
    e_top = (rr + 1) * (na - 1) + cc
    e_left = off + rr * na + cc
    e_right = off + rr * na + cc + 1
    cb = h_cross[rr, cc]
    ct = h_cross[rr + 1, cc]
    cl = v_cross[rr, cc]
    cr = v_cross[rr, cc + 1]
    count = cb.astype(int) + ct + cl + cr
    for q in np.nonzero(count == 2)[0]:
        ids = [e for e, flag in ((e_bottom[q], cb[q]), (e_right[q], cr[q]),
                                 (e_top[q], ct[q]), (e_left[q], cl[q])) if flag]
        segs.append((int(ids[0]), int(ids[1])))
    for q in np.nonzero(count == 4)[0]:
        r, c = rr[q], cc[q]
        center = (g[r, c] + g[r, c + 1] + g[r + 1, c] + g[r + 1, c + 1]) / 4
        if (center > 0) == pos[r, c]:
            segs.append((int(e_bottom[q]), int(e_right[q])))
            segs.append((int(e_top[q]), int(e_left[q])))
        else:
            segs.append((int(e_left[q]), int(e_bottom[q])))
            segs.append((int(e_right[q]), int(e_top[q])))
    return segs, h_cross, v_cross


def _chain(segs: list[tuple[int, int]]) -> list[tuple[list[int], bool]]:
    adj: dict[int, list[int]] = {}
    for a, b in segs:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen_edges: set[tuple[int, int]] = set()
    out = []

    def walk(start):
        path = [start]
        prev, cur = None, start
        while True:
            nxt = None
            for cand in adj[cur]:
                key = (min(cur, cand), max(cur, cand))
                if key in seen_edges:
                    continue
                nxt = cand
                seen_edges.add(key)
                break
            if nxt is None:
                return path
            path.append(nxt)
            prev, cur = cur, nxt
            if cur == start:
                return path

    for node in sorted(adj):
        if len(adj[node]) == 1 and all((min(node, x), max(node, x)) not in seen_edges for x in adj[node]):
            out.append((walk(node), False))
    for node in sorted(adj):
        if any((min(node, x), max(node, x)) not in seen_edges for x in adj[node]):
            path = walk(node)
            closed = len(path) > 2 and path[0] == path[-1]
            out.append((path, closed))
    return out


def _refine(batch: CriticalBatch, kind: str, lam_u: np.ndarray, lam_w: np.ndarray,
            vu: np.ndarray, vw: np.ndarray, iters: int = 60):
    """Bisection along grid edges for the pair field; vu, vw are (E, 2) values."""
    lo = np.zeros(len(lam_u))
    hi = np.ones(len(lam_u))
    g_lo = _pair_field(kind, vu[:, 0], vu[:, 1])

    def eval_at(tau):
        lam = lam_u + tau * (lam_w - lam_u)
        _, vals, ok = batch(lam)
        pred = vu + tau[:, None] * (vw - vu)
        pick = np.abs(vals[:, None, :] - pred[:, :, None]).argmin(axis=2)
        v = np.take_along_axis(vals, pick, axis=1)
        return _pair_field(kind, v[:, 0], v[:, 1]), ok

    for _ in range(iters):
        mid = (lo + hi) / 2
        g_mid, _ = eval_at(mid)
        same = np.sign(g_mid) == np.sign(g_lo)
        lo = np.where(same, mid, lo)
        g_lo = np.where(same, g_mid, g_lo)
        hi = np.where(same, hi, mid)
    tau = (lo + hi) / 2
    g_fin, ok = eval_at(tau)
    lam = lam_u + tau * (lam_w - lam_u)
    return lam, np.where(ok, np.abs(g_fin), np.inf)


def extract_curves(f: BranchField, kind: str | None = None) -> CurveSet:
    """Anti-Stokes and/or Stokes curves for every pair of value classes."""
    kinds = [ANTI_STOKES, STOKES] if kind is None else [kind]
    for k_ in kinds:
        if k_ not in (ANTI_STOKES, STOKES):
            raise ValueError(f"unknown curve kind {k_!r}")
    batch = CriticalBatch(f.potential)
    vals, res = f.values, f.resolved
    nb, na, m = vals.shape
    reps = sorted(set(f.classes))
    lam = f.lam
    pts = f.points
    h_cons = _edge_consistent(pts, (slice(None), slice(None, -1)), (slice(None), slice(1, None)))
    h_cons &= _edge_consistent(pts, (slice(None), slice(1, None)), (slice(None), slice(None, -1)))
    v_cons = _edge_consistent(pts, (slice(None, -1), slice(None)), (slice(1, None), slice(None)))
    v_cons &= _edge_consistent(pts, (slice(1, None), slice(None)), (slice(None, -1), slice(None)))
    polylines: list[Polyline] = []
    dropped = 0
    off = nb * (na - 1)
    for k_ in kinds:
        for ii, i in enumerate(reps):
            for j in reps[ii + 1:]:
                g = _pair_field(k_, vals[..., i], vals[..., j])
                node_ok = res & np.isfinite(g)
                if not node_ok.any():
                    continue
                gv = g[node_ok]
                if k_ == ANTI_STOKES and np.abs(gv).max() < 1e-8:
                    continue
                if k_ == STOKES and np.ptp(gv) < 1e-8:
                    continue
                h_ok = h_cons[..., i] & h_cons[..., j] & node_ok[:, :-1] & node_ok[:, 1:]
                v_ok = v_cons[..., i] & v_cons[..., j] & node_ok[:-1, :] & node_ok[1:, :]
                if k_ == STOKES:
                    h_ok &= np.abs(g[:, 1:] - g[:, :-1]) < np.pi / 2
                    v_ok &= np.abs(g[1:, :] - g[:-1, :]) < np.pi / 2
                segs, _, _ = _march(g, node_ok, h_ok, v_ok)
                if not segs:
                    continue
                edges = sorted({e for s in segs for e in s})
                e_arr = np.array(edges)
                is_h = e_arr < off
                ru = np.where(is_h, e_arr // max(na - 1, 1), (e_arr - off) // na)
                cu = np.where(is_h, e_arr % max(na - 1, 1), (e_arr - off) % na)
                rw = np.where(is_h, ru, ru + 1)
                cw = np.where(is_h, cu + 1, cu)
                vu = np.stack([vals[ru, cu, i], vals[ru, cu, j]], axis=1)
                vw = np.stack([vals[rw, cw, i], vals[rw, cw, j]], axis=1)
                lam_pts, resid = _refine(batch, k_, lam[ru, cu], lam[rw, cw], vu, vw)
                where = {e: q for q, e in enumerate(edges)}
                good = resid < REFINE_TOL
                dropped += int((~good).sum())
                for path, closed in _chain(segs):
                    run: list[int] = []
                    pieces = []
                    for e in path:
                        q = where[e]
                        if good[q]:
                            run.append(q)
                        else:
                            if len(run) >= 2:
                                pieces.append(run)
                            run = []
                    if len(run) >= 2:
                        pieces.append(run)
                    for piece in pieces:
                        pts = lam_pts[piece]
                        polylines.append(Polyline(
                            pair=(i, j), kind=k_,
                            vertices=np.stack([pts.real, pts.imag], axis=1),
                            residuals=resid[piece],
                            closed=closed and len(pieces) == 1 and len(piece) == len(path)))
    return CurveSet(polylines, f.window, f.resolution, dropped)


# --- named curves -------------------------------------------------------------

def bivariate(terms: dict[tuple[int, int], object]) -> SparsePoly:
    return SparsePoly(2, {w: LambdaPoly.constant(Fraction(c)) for w, c in terms.items()})


A = bivariate({(1, 0): 1})
B = bivariate({(0, 1): 1})
ONE = bivariate({(0, 0): 1})


def lemniscate() -> SparsePoly:
    am3 = A - ONE.scale(3)
    r2 = am3 * am3 + B * B
    return r2 * r2 - (am3 * am3 - B * B).scale(16)


def modified_limacon() -> SparsePoly:
    r2 = A * A + B * B
    return lemniscate() - (r2 * r2 - ONE).scale(64)


def unit_circle() -> SparsePoly:
    return A * A + B * B - ONE


def stokes_lines() -> SparsePoly:
    return A * (A - ONE.scale(3)) * B


def axis_and_ellipse() -> SparsePoly:
    return B * ((A * A + B * B).scale(3) - A)


def imaginary_axis() -> SparsePoly:
    return A


@dataclass
class CurveCheck:
    passed: bool
    max_residual: float
    vertex_count: int
    tol: float


def _eval_bivariate(p: SparsePoly, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    for (i, j), c in p.terms.items():
        out = out + float(c.constant_value()) * x ** i * y ** j
    return out


def verify_named_curve(cs, poly: SparsePoly | Callable, tol: float) -> CurveCheck:
    """Max of |P| / |grad P| over all vertices (an approximate distance)."""
    verts = cs.vertices() if isinstance(cs, CurveSet) else np.concatenate([pl.vertices for pl in cs])
    if len(verts) == 0:
        raise ValueError("curve set is empty")
    x, y = verts[:, 0], verts[:, 1]
    if callable(poly) and not isinstance(poly, SparsePoly):
        poly = poly()
    val = _eval_bivariate(poly, x, y)
    gx = _eval_bivariate(poly.derivative(0), x, y)
    gy = _eval_bivariate(poly.derivative(1), x, y)
    grad = np.hypot(gx, gy)
    resid = np.abs(val) / np.maximum(grad, 1e-300)
    worst = float(resid.max())
    return CurveCheck(worst < tol, worst, len(verts), tol)


# --- Stokes arrangement and accumulation ----------------------------------------

def _cell_index(f: BranchField, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    amin, amax, bmin, bmax = f.window
    na, nb = f.resolution
    ca = np.floor((pts[:, 0] - amin) / (amax - amin) * (na - 1)).astype(int)
    cb = np.floor((pts[:, 1] - bmin) / (bmax - bmin) * (nb - 1)).astype(int)
    return np.clip(cb, 0, nb - 2), np.clip(ca, 0, na - 2)


def stokes_regions(f: BranchField, stokes: CurveSet) -> tuple[np.ndarray, int]:
    """Label connected components of grid cells not touched by Stokes curves.

    Cells with an unresolved corner are also walls, which closes the small gaps
    that the curves have around discriminant points.
    """
    na, nb = f.resolution
    wall = ~(f.resolved[:-1, :-1] & f.resolved[:-1, 1:] & f.resolved[1:, :-1] & f.resolved[1:, 1:])
    amin, amax, bmin, bmax = f.window
    cell = min((amax - amin) / max(na - 1, 1), (bmax - bmin) / max(nb - 1, 1))
    for pl in stokes.polylines:
        v = pl.vertices
        if len(v) < 2:
            continue
        seg = np.diff(v, axis=0)
        steps = np.maximum(2, np.ceil(np.hypot(seg[:, 0], seg[:, 1]) / (0.25 * cell)).astype(int))
        samples = [v[:-1][q] + np.linspace(0, 1, s)[:, None] * seg[q] for q, s in enumerate(steps)]
        pts = np.concatenate(samples)
        r, c = _cell_index(f, pts)
        wall[r, c] = True
    labels, count = ndimage.label(~wall)
    return labels, count


@dataclass
class Segment:
    id: int
    pair: tuple[int, int]
    region: int
    vertices: np.ndarray
    active: bool = False
    hits: int = 0


@dataclass
class AccumulationReport:
    n: int
    rootCount: int
    roots: list[complex]
    perRoot: list[float]
    nearestSegment: list[int]
    epsilon: float
    summary: dict
    segments: list[Segment]
    activeSegments: list[int]
    regionCount: int
    regions: np.ndarray = field(repr=False, default=None)

    def active_regions(self) -> list[int]:
        return sorted({s.region for s in self.segments if s.active})

    def to_json(self) -> dict:
        return {
            "n": self.n, "root_count": self.rootCount, "epsilon": self.epsilon,
            "summary": self.summary,
            "roots": [[z.real, z.imag] for z in self.roots],
            "per_root_distance": self.perRoot,
            "nearest_segment": self.nearestSegment,
            "active_segments": self.activeSegments,
            "segments": [{"id": s.id, "pair": list(s.pair), "region": s.region,
                          "active": s.active, "hits": s.hits,
                          "vertices": [[float(x), float(y)] for x, y in s.vertices]}
                         for s in self.segments],
        }


def _split_by_region(f: BranchField, labels: np.ndarray, pl: Polyline) -> list[tuple[int, np.ndarray]]:
    r, c = _cell_index(f, pl.vertices)
    lab = labels[r, c].copy()
    # vertices in wall cells inherit the nearest labelled neighbour along the line
    known = np.nonzero(lab > 0)[0]
    if known.size == 0:
        return [(0, pl.vertices)]
    for q in np.nonzero(lab == 0)[0]:
        lab[q] = lab[known[np.argmin(np.abs(known - q))]]
    out = []
    start = 0
    for q in range(1, len(lab) + 1):
        if q == len(lab) or lab[q] != lab[start]:
            stop = min(q + 1, len(lab))
            out.append((int(lab[start]), pl.vertices[start:stop]))
            start = q
    return [(reg, v) for reg, v in out if len(v) >= 2]


def point_segment_distances(pts: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Distance from each point (P, 2) to a polyline (L, 2)."""
    a, b = verts[:-1], verts[1:]
    ab = b - a
    denom = np.maximum((ab ** 2).sum(axis=1), 1e-300)
    ap = pts[:, None, :] - a[None, :, :]
    t = np.clip((ap * ab[None]).sum(axis=2) / denom[None], 0, 1)
    proj = a[None] + t[..., None] * ab[None]
    d = np.hypot(*(pts[:, None, :] - proj).transpose(2, 0, 1))
    return d.min(axis=1)


def accumulation_report(p: Potential, n: int, cs: CurveSet, stokesCs: CurveSet,
                        epsilon: float = 0.1, field_: BranchField | None = None,
                        roots: Sequence[complex] | None = None) -> AccumulationReport:
    """Distances from the zeros of A_n to the anti-Stokes curves.

    A segment (an anti-Stokes polyline cut at Stokes-region boundaries) is
    active when at least one root within epsilon has it as its nearest segment.
    """
    if roots is None:
        an = compute_an(p, n)
        if an.degree < 1:
            raise ValueError(f"A_{n} has no roots (degree {an.degree})")
        roots = find_roots(an).as_complex()
    roots = [complex(z) for z in roots]
    anti = cs.select(kind=ANTI_STOKES)
    if field_ is None:
        field_ = build_branch_field(p, cs.window, cs.resolution)
    labels, count = stokes_regions(field_, stokesCs)
    segments: list[Segment] = []
    for pl in anti.polylines:
        for reg, v in _split_by_region(field_, labels, pl):
            segments.append(Segment(len(segments), pl.pair, reg, v))
    pts = np.array([[z.real, z.imag] for z in roots]) if roots else np.zeros((0, 2))
    if segments and len(pts):
        dist = np.stack([point_segment_distances(pts, s.vertices) for s in segments], axis=1)
        nearest = dist.argmin(axis=1)
        best = dist[np.arange(len(pts)), nearest]
    else:
        nearest = np.full(len(pts), -1)
        best = np.full(len(pts), np.inf)
    for q, s_id in enumerate(nearest):
        if s_id >= 0 and best[q] <= epsilon:
            segments[s_id].hits += 1
            segments[s_id].active = True
    active = [s.id for s in segments if s.active]
    summary = {
        "max": float(best.max()) if len(best) else 0.0,
        "mean": float(best.mean()) if len(best) else 0.0,
        "fraction_within": float((best <= epsilon).mean()) if len(best) else 1.0,
    }
    return AccumulationReport(n=n, rootCount=len(roots), roots=roots, perRoot=[float(x) for x in best],
                              nearestSegment=[int(x) for x in nearest], epsilon=epsilon,
                              summary=summary, segments=segments, activeSegments=active,
                              regionCount=count, regions=labels)
