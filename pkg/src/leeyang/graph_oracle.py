"""Brute-force oracles.

partition_sum counts vertex partitions of labelled half-edges directly, and
the Ising helpers compare spin sums with the high-temperature subgraph
expansion on explicit multigraphs.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import mpmath
import numpy as np

from .algebra import LambdaPoly, ResourceError, as_rational, double_factorial, multi_factorial, to_mpc
from .moment_engine import an_at_point
from .potential import Potential, build_ising_master

HALF_EDGE_CAP = 12
SPIN_CAP = 24
EDGE_CAP = 24
MATCHING_CAP = 2_000_000


@dataclass(frozen=True)
class SimpleGraphSpec:
    vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.vertices < 0:
            raise ValueError("vertex count must be nonnegative")
        norm = []
        for e in self.edges:
            i, j = int(e[0]), int(e[1])
            if not (0 <= i < self.vertices and 0 <= j < self.vertices):
                raise ValueError(f"edge {e} out of range")
            norm.append((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    def degrees(self) -> list[int]:
        deg = [0] * self.vertices
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    @classmethod
    def from_json(cls, data) -> SimpleGraphSpec:
        if isinstance(data, dict):
            edges = [tuple(e) for e in data["edges"]]
            nv = data.get("vertices", 1 + max((max(e) for e in edges), default=-1))
        else:
            edges = [tuple(e) for e in data]
            nv = 1 + max((max(e) for e in edges), default=-1)
        return cls(nv, tuple(edges))

    def to_json(self) -> dict:
        return {"vertices": self.vertices, "edges": [list(e) for e in self.edges]}


@dataclass(frozen=True)
class HalfEdgeGraph:
    """Half-edges of each colour, a vertex partition and per-colour matchings."""

    colours: tuple[tuple[int, ...], ...]
    vertex_partition: tuple[tuple[int, ...], ...]
    matchings: tuple[tuple[tuple[int, int], ...], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for hs in self.colours:
            if len(hs) % 2:
                raise ValueError("every colour needs an even number of half-edges")
            if seen & set(hs):
                raise ValueError("colour label sets must be disjoint")
            seen |= set(hs)
        covered = [x for b in self.vertex_partition for x in b]
        if any(not b for b in self.vertex_partition) or sorted(covered) != sorted(seen):
            raise ValueError("vertex partition must cover all half-edges with nonempty blocks")
        for hs, m in zip(self.colours, self.matchings):
            if sorted(x for pair in m for x in pair) != sorted(hs):
                raise ValueError("matching must cover its colour exactly")

    def multigraph(self) -> SimpleGraphSpec:
        owner = {x: v for v, b in enumerate(self.vertex_partition) for x in b}
        edges = [(owner[a], owner[b]) for m in self.matchings for a, b in m]
        return SimpleGraphSpec(len(self.vertex_partition), tuple(edges))


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _count_partitions(colour_of: list[int], d: int, support: set[tuple]) -> Counter:
    """Count set partitions of labelled half-edges into admissible blocks.

    Returns a Counter keyed by the sorted tuple of block types.  Blocks are
    built around the smallest unused label (restricted-growth order), and
    each candidate block is pruned unless its colour-degree vector lies in
    the support.
    """
    sizes = sorted({sum(w) for w in support})
    out: Counter = Counter()
    labels = list(range(len(colour_of)))

    def block_type(block) -> tuple:
        w = [0] * d
        for x in block:
            w[colour_of[x]] += 1
        return tuple(w)

    def rec(remaining: tuple[int, ...], types: tuple):
        if not remaining:
            out[tuple(sorted(types))] += 1
            return
        first, rest = remaining[0], remaining[1:]
        for size in sizes:
            if size - 1 > len(rest):
                break
            for others in itertools.combinations(rest, size - 1):
                block = (first,) + others
                t = block_type(block)
                if t not in support:
                    continue
                left = tuple(x for x in rest if x not in others)
                rec(left, types + (t,))

    rec(tuple(labels), ())
    return out


def partition_sum(p: Potential, n: int, cap: int = HALF_EDGE_CAP) -> LambdaPoly:
    p.require_valid()
    nK, nM = n * p.K, n * p.M
    if nK.denominator != 1 or nM.denominator != 1:
        return LambdaPoly()
    nM = int(nM)
    if 2 * nM > cap:
        raise ResourceError(f"{2 * nM} half-edges exceed the enumeration cap of {cap}")
    support = set(p.lambdas)
    total = LambdaPoly()
    for s in _compositions(nM, p.d):
        colour_of = [i for i, si in enumerate(s) for _ in range(2 * si)]
        counts = _count_partitions(colour_of, p.d, support)
        inner = LambdaPoly()
        for types, cnt in sorted(counts.items()):
            term = LambdaPoly.constant(cnt)
            for t in types:
                term = term * p.lambdas[t]
            inner = inner + term
        weight = Fraction(1)
        for si in s:
            weight *= double_factorial(2 * si - 1)
        weight /= multi_factorial([2 * si for si in s])
        total = total + inner.scale(weight)
    return total


def spin_sum_partition(g: SimpleGraphSpec, betaJ, betaH, prec: int = 64) -> mpmath.mpc:
    """Sum over all spin configurations, grouped by (bond sum, magnetisation)."""
    nv = g.vertices
    if nv > SPIN_CAP:
        raise ResourceError(f"{nv} vertices exceed the spin-sum cap of {SPIN_CAP}")
    states = np.arange(2 ** nv, dtype=np.int64)
    spins = 1 - 2 * ((states[:, None] >> np.arange(nv, dtype=np.int64)) & 1) if nv else \
        np.zeros((1, 0), dtype=np.int64)
    bond = np.zeros(len(spins), dtype=np.int64)
    for i, j in g.edges:
        bond += spins[:, i] * spins[:, j]
    mag = spins.sum(axis=1)
    pairs = Counter(zip(bond.tolist(), mag.tolist()))
    with mpmath.workprec(prec):
        bJ, bH = to_mpc(betaJ, prec), to_mpc(betaH, prec)
        terms = [cnt * mpmath.exp(bJ * e + bH * m) for (e, m), cnt in sorted(pairs.items())]
        return mpmath.fsum(terms)


def _subgraph_census(g: SimpleGraphSpec) -> Counter:
    """Counter {(odd-vertex bitmask, edge count): number of subgraphs}."""
    if len(g.edges) > EDGE_CAP:
        raise ResourceError(f"{len(g.edges)} edges exceed the subgraph cap of {EDGE_CAP}")
    states: Counter = Counter({(0, 0): 1})
    for i, j in g.edges:
        flip = (1 << i) ^ (1 << j)
        nxt: Counter = Counter(states)
        for (mask, m), c in states.items():
            nxt[(mask ^ flip, m + 1)] += c
        states = nxt
    return states


def subgraph_expansion_partition(g: SimpleGraphSpec, betaJ, betaH, prec: int = 64,
                                 eulerian_only: bool = False) -> mpmath.mpc:
    """High-temperature expansion with the external field as a ghost vertex.

    Z = 2^|V| cosh(bJ)^|E| cosh(bH)^|V| sum_gamma prod_v J^deg(v) h^(deg(v) mod 2)
    with J = sqrt(tanh bJ) and h = tanh bH.  Since sum_v deg(v) = 2|gamma|
    the J-factors collapse to tanh(bJ)^|gamma|.
    """
    census = _subgraph_census(g)
    with mpmath.workprec(prec):
        bJ, bH = to_mpc(betaJ, prec), to_mpc(betaH, prec)
        t, hh = mpmath.tanh(bJ), mpmath.tanh(bH)
        terms = []
        for (mask, m), c in sorted(census.items()):
            odd = bin(mask).count("1")
            if eulerian_only and odd:
                continue
            terms.append(c * t ** m * hh ** odd)
        pref = 2 ** g.vertices * mpmath.cosh(bJ) ** len(g.edges) * mpmath.cosh(bH) ** g.vertices
        return pref * mpmath.fsum(terms)


def ising_subgraph_weight(g: SimpleGraphSpec, J: Fraction, h: Fraction) -> Fraction:
    """Exact sum over subgraphs of prod_v J^deg(v) h^(deg(v) mod 2)."""
    total = Fraction(0)
    for (mask, m), c in _subgraph_census(g).items():
        total += c * J ** (2 * m) * h ** bin(mask).count("1")
    return total


def _perfect_matchings(items: tuple[int, ...]) -> Iterator[tuple[tuple[int, int], ...]]:
    if not items:
        yield ()
        return
    a, rest = items[0], items[1:]
    for idx, b in enumerate(rest):
        for m in _perfect_matchings(rest[:idx] + rest[idx + 1:]):
            yield ((a, b),) + m


def _canonical(nv: int, edges: Sequence[tuple[int, int]]) -> tuple:
    best = None
    for perm in itertools.permutations(range(nv)):
        key = tuple(sorted(tuple(sorted((perm[i], perm[j]))) for i, j in edges))
        if best is None or key < best:
            best = key
    return best


@dataclass
class GraphClass:
    edges: tuple
    vertices: int
    aut_order: int
    weight: Fraction


@dataclass
class AverageReport:
    k: int
    n: int
    J: Fraction
    h: Fraction
    graph_sum: Fraction
    engine_value: Fraction
    passed: bool
    classes: list[GraphClass] = field(default_factory=list)


def average_partition_check(k: int, n: int, J, h, cap: int = MATCHING_CAP) -> AverageReport:
    """Sum of Ising subgraph weights over k-regular multigraphs, weighted by 1/|Aut|.

    Vertices are fixed as consecutive blocks of k half-edges and every perfect
    matching of the half-edges is enumerated.  A class G arises from
    k!^N N! / |Aut G| matchings, so 1/|Aut G| = count_G / (k!^N N!).
    """
    J, h = as_rational(J), as_rational(h)
    if k < 3:
        raise ValueError("k must be >= 3")
    nv_frac = Fraction(2 * n, k - 2)
    if nv_frac.denominator != 1:
        raise ValueError(f"no {k}-regular graphs with Euler characteristic -{n}")
    nv = int(nv_frac)
    half_edges = nv * k
    if half_edges % 2:
        raise ValueError("odd number of half-edges")
    n_match = double_factorial(half_edges - 1)
    if n_match > cap:
        raise ResourceError(f"{n_match} matchings exceed the enumeration cap of {cap}")
    owner = [x // k for x in range(half_edges)]
    counts: Counter = Counter()
    for m in _perfect_matchings(tuple(range(half_edges))):
        edges = [(owner[a], owner[b]) for a, b in m]
        counts[_canonical(nv, edges)] += 1
    labelled = math.factorial(k) ** nv * math.factorial(nv)
    classes = []
    total = Fraction(0)
    for key, cnt in sorted(counts.items()):
        aut = Fraction(labelled, cnt)
        if aut.denominator != 1:
            raise ArithmeticError("orbit count does not divide the labelling count")
        w = ising_subgraph_weight(SimpleGraphSpec(nv, key), J, h)
        classes.append(GraphClass(key, nv, int(aut), w))
        total += w / aut
    engine = an_at_point(build_ising_master(k, J, h), n)
    return AverageReport(k, n, J, h, total, engine, total == engine, classes)
