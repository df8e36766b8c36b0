import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leeyang.algebra import LambdaPoly, ResourceError
from leeyang.graph_oracle import (HalfEdgeGraph, SimpleGraphSpec, average_partition_check,
                                  ising_subgraph_weight, partition_sum, spin_sum_partition,
                                  subgraph_expansion_partition)
from leeyang.moment_engine import compute_an
from leeyang.potential import Potential, ising1, ising2


@st.composite
def graphs(draw, max_v=6, max_e=9):
    nv = draw(st.integers(1, max_v))
    edges = draw(st.lists(st.tuples(st.integers(0, nv - 1), st.integers(0, nv - 1)), max_size=max_e))
    return SimpleGraphSpec(nv, tuple(edges))


@pytest.mark.parametrize("n", [0, 1, 2])
def test_partition_sum_equals_engine_v1(n):
    assert partition_sum(ising1(), n) == compute_an(ising1(), n)


def test_partition_sum_equals_engine_v2():
    assert partition_sum(ising2(), 1) == compute_an(ising2(), 1)


def test_partition_sum_k3():
    p = Potential(2, 3, {(3, 0): LambdaPoly([0, 1]), (1, 2): 1, (2, 1): 2})
    assert partition_sum(p, 1) == compute_an(p, 1)
    assert not partition_sum(p, 1).is_zero()


def test_partition_sum_cap():
    with pytest.raises(ResourceError):
        partition_sum(ising1(), 4)


def test_triangle_spin_sum():
    tri = SimpleGraphSpec(3, ((0, 1), (1, 2), (0, 2)))
    J = mpmath.mpf(1) / 3
    z = spin_sum_partition(tri, J, 0)
    assert abs(z - (2 * mpmath.exp(3 * J) + 6 * mpmath.exp(-J))) < mpmath.mpf(10) ** -15


@settings(max_examples=25, deadline=None)
@given(graphs(), st.fractions(-2, 2, max_denominator=5), st.fractions(-2, 2, max_denominator=5))
def test_spin_sum_equals_subgraph_expansion(g, bJ, bH):
    # tanh weights cancel for negative couplings, so work well above the tolerance
    a = spin_sum_partition(g, bJ, bH, 128)
    b = subgraph_expansion_partition(g, bJ, bH, 128)
    assert abs(a - b) <= mpmath.mpf(10) ** -20 * abs(a)


def test_eulerian_only_at_zero_field():
    g = SimpleGraphSpec(4, ((0, 1), (1, 2), (2, 3), (3, 0), (0, 2)))
    a = subgraph_expansion_partition(g, Fraction(1, 2), 0)
    b = subgraph_expansion_partition(g, Fraction(1, 2), 0, eulerian_only=True)
    assert abs(a - b) < mpmath.mpf(10) ** -15


def test_subgraph_weight_loop():
    # a single loop: empty subgraph plus the loop itself (degree 2 at the vertex)
    g = SimpleGraphSpec(1, ((0, 0),))
    assert ising_subgraph_weight(g, Fraction(1, 2), Fraction(1, 3)) == 1 + Fraction(1, 4)


def test_half_edge_graph():
    h = HalfEdgeGraph(colours=((0, 1, 2, 3),), vertex_partition=((0, 1), (2, 3)),
                      matchings=(((0, 2), (1, 3)),))
    assert h.multigraph() == SimpleGraphSpec(2, ((0, 1), (0, 1)))
    with pytest.raises(ValueError):
        HalfEdgeGraph(colours=((0, 1, 2),), vertex_partition=((0, 1, 2),), matchings=(((0, 1),),))


def test_average_n1_automorphisms():
    # one vertex with two loops: 3 matchings out of 4! labellings
    rep = average_partition_check(4, 1, Fraction(1, 2), 0)
    assert rep.passed
    assert [c.aut_order for c in rep.classes] == [8]
    assert rep.graph_sum == Fraction(25, 128)


def test_average_n2_orbit_stabiliser():
    rep = average_partition_check(4, 2, Fraction(1, 3), Fraction(1, 2))
    assert rep.passed
    assert sorted(c.aut_order for c in rep.classes) == [16, 48, 128]
    total = sum(Fraction(1, c.aut_order) for c in rep.classes)
    assert total == Fraction(math.prod(range(7, 0, -2)), math.factorial(4) ** 2 * 2)


def test_average_k3():
    assert average_partition_check(3, 1, Fraction(2, 3), Fraction(1, 5)).passed


def test_average_bad_input():
    with pytest.raises(ValueError):
        average_partition_check(5, 1, 1, 0)


def test_graph_spec_json():
    g = SimpleGraphSpec.from_json([[0, 1], [2, 1]])
    assert g.vertices == 3 and g.edges == ((0, 1), (1, 2))
    assert SimpleGraphSpec.from_json(g.to_json()) == g
    with pytest.raises(ValueError):
        SimpleGraphSpec(2, ((0, 2),))
