import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from leeyang.algebra import LambdaPoly
from leeyang.potential import (LAMBDA, SQRT_LAMBDA, Potential, PotentialError, build_ising_master,
                               dumps, evaluate_exact, ising1, ising2, load, loads,
                               single_monomial, validate)

q = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def test_ising1_terms():
    p = ising1()
    lam = LambdaPoly.lam()
    assert p.lambdas == {(4, 0): LambdaPoly([1]), (2, 2): lam, (0, 4): lam ** 2}
    sp = p.as_sparse()
    assert sp.coefficient((4, 0)) == LambdaPoly([Fraction(1, 24)])
    assert sp.coefficient((2, 2)) == lam.scale(Fraction(1, 4))
    assert sp.coefficient((0, 4)) == (lam ** 2).scale(Fraction(1, 24))


def test_ising2_terms():
    p = ising2()
    lam = LambdaPoly.lam()
    for i in range(5):
        assert p.lambdas[(i, 4 - i)] == (lam if i % 2 else LambdaPoly([1]))


def test_master_symbolic_modes():
    assert build_ising_master(4, SQRT_LAMBDA, 0) == ising1()
    assert build_ising_master(4, 1, LAMBDA) == ising2()
    with pytest.raises(PotentialError):
        build_ising_master(4, SQRT_LAMBDA, 1)


@given(q, q)
def test_master_numeric_matches_definition(J, h):
    p = build_ising_master(4, J, h)
    x = (Fraction(2, 3), Fraction(-1, 5))
    expected = sum(J ** i * (h if i % 2 else 1) * x[0] ** i * x[1] ** (4 - i)
                   / (__import__("math").factorial(i) * __import__("math").factorial(4 - i))
                   for i in range(5))
    assert evaluate_exact(p, x) == expected


def test_validation_reports():
    bad = Potential(2, 4, {(3, 0): 1, (2, 2): 1})
    rep = validate(bad)
    assert not rep.valid and not rep.homogeneous
    assert "homogeneity" in rep.problems[0]
    with pytest.raises(PotentialError):
        bad.require_valid()
    assert validate(Potential(2, 4, {})).empty
    assert not validate(Potential(2, 2, {(2, 0): 1})).valid


def test_admissibility():
    p3 = Potential(2, 3, {(3, 0): 1, (1, 2): 1})
    assert p3.K == 2 and p3.M == 3
    assert p3.admissible(1)
    p5 = single_monomial(5)
    assert p5.K == Fraction(2, 3)
    assert not p5.admissible(1) and p5.admissible(3)
    rep = validate(p5, n=2)
    assert rep.admissible is False and rep.nK == Fraction(4, 3)


def test_multi_index_shape():
    with pytest.raises(PotentialError):
        Potential(2, 4, {(4,): 1})
    with pytest.raises(PotentialError):
        Potential(2, 4, {(5, -1): 1})


def test_json_round_trip(tmp_path):
    p = ising1()
    assert loads(dumps(p)) == p
    path = tmp_path / "v.json"
    path.write_text(dumps(p))
    assert load(path) == p


@pytest.mark.parametrize("text", ['[]', '{"d": 2, "k": 4}', '{"d": 2, "k": 4, "terms": [{"w": [4, 0]}]}',
                                  '{"d": 2, "k": 4, "terms": [{"w": [4, 0], "lambda": ["x"]}]}'])
def test_malformed_config(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(PotentialError):
        load(path)


def test_duplicate_terms_add():
    data = {"d": 2, "k": 4, "terms": [{"w": [4, 0], "lambda": ["1"]}, {"w": [4, 0], "lambda": ["0", "1"]}]}
    assert Potential.from_json(json.loads(json.dumps(data))).lambdas[(4, 0)] == LambdaPoly([1, 1])


def test_at_and_scaled():
    p = ising1()
    assert p.at(2).lambdas[(0, 4)] == LambdaPoly([4])
    assert p.scaled(3).lambdas[(2, 2)] == LambdaPoly([0, 3])
    assert evaluate_exact(p, (1, 1), Fraction(1)) == Fraction(1, 24) + Fraction(1, 4) + Fraction(1, 24)
