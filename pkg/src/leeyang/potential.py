from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .algebra import LambdaPoly, SparsePoly, as_rational, multi_factorial

SQRT_LAMBDA = "sqrt(lambda)"
LAMBDA = "lambda"


class PotentialError(ValueError):
    pass


class Potential:
    """Homogeneous potential V = sum_w Lambda_w(lambda) x^w / w!.

    The raw Lambda_w are stored; the 1/w! factor is applied by as_sparse().
    Construction does not enforce homogeneity so that validate() can report
    on malformed inputs; everything downstream calls require_valid().
    """

    __slots__ = ("d", "k", "lambdas")

    def __init__(self, d: int, k: int, lambdas: Mapping):
        if d < 1:
            raise PotentialError("colour count d must be >= 1")
        self.d = int(d)
        self.k = int(k)
        clean = {}
        for w, c in lambdas.items():
            w = tuple(int(x) for x in w)
            if len(w) != self.d or any(x < 0 for x in w):
                raise PotentialError(f"multi-index {w} does not fit d={self.d}")
            c = c if isinstance(c, LambdaPoly) else LambdaPoly.constant(c)
            if not c.is_zero():
                clean[w] = c
        self.lambdas: dict[tuple, LambdaPoly] = dict(sorted(clean.items()))

    @property
    def K(self) -> Fraction:
        return Fraction(2, self.k - 2)

    @property
    def M(self) -> Fraction:
        return Fraction(self.k, self.k - 2)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Potential) and self.d == other.d
                and self.k == other.k and self.lambdas == other.lambdas)

    def __hash__(self) -> int:
        return hash((self.d, self.k, tuple(self.lambdas.items())))

    def __repr__(self) -> str:
        return f"Potential(d={self.d}, k={self.k}, lambdas={self.lambdas!r})"

    def as_sparse(self) -> SparsePoly:
        return SparsePoly(self.d, {w: c.scale(Fraction(1, multi_factorial(w)))
                                   for w, c in self.lambdas.items()})

    def lambda_degree(self) -> int:
        return max((c.degree for c in self.lambdas.values()), default=-1)

    def is_numeric(self) -> bool:
        return all(c.is_constant() for c in self.lambdas.values())

    def at(self, lam) -> Potential:
        """Substitute an exact rational value for lambda."""
        lam = as_rational(lam)
        return Potential(self.d, self.k,
                         {w: LambdaPoly.constant(c(lam)) for w, c in self.lambdas.items()})

    def scaled(self, c) -> Potential:
        return Potential(self.d, self.k, {w: v.scale(c) for w, v in self.lambdas.items()})

    def admissible(self, n: int) -> bool:
        return (n * self.K).denominator == 1 and (n * self.M).denominator == 1

    def require_valid(self) -> None:
        rep = validate(self)
        if not rep.valid:
            raise PotentialError("; ".join(rep.problems))

    def to_json(self) -> dict:
        return {"d": self.d, "k": self.k,
                "terms": [{"w": list(w), "lambda": c.to_json()} for w, c in self.lambdas.items()]}

    @classmethod
    def from_json(cls, data) -> Potential:
        if not isinstance(data, dict):
            raise PotentialError("config must be a JSON object")
        try:
            d, k, terms = data["d"], data["k"], data["terms"]
        except KeyError as exc:
            raise PotentialError(f"config is missing key {exc}") from None
        if not isinstance(d, int) or not isinstance(k, int) or not isinstance(terms, list):
            raise PotentialError("config needs integer d, k and a list of terms")
        lambdas: dict[tuple, LambdaPoly] = {}
        for t in terms:
            try:
                w = tuple(t["w"])
                lp = LambdaPoly.from_json(t["lambda"])
            except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
                raise PotentialError(f"malformed term {t!r}: {exc}") from None
            if not all(isinstance(x, int) for x in w):
                raise PotentialError(f"multi-index entries must be integers: {t!r}")
            lambdas[w] = lambdas[w] + lp if w in lambdas else lp
        return cls(d, k, lambdas)


@dataclass
class ValidationReport:
    valid: bool
    homogeneous: bool
    empty: bool
    degrees: list[int]
    problems: list[str] = field(default_factory=list)
    n: int | None = None
    nK: Fraction | None = None
    nM: Fraction | None = None
    admissible: bool | None = None


def validate(p: Potential, n: int | None = None) -> ValidationReport:
    problems = []
    degrees = sorted({sum(w) for w in p.lambdas})
    empty = not p.lambdas
    if empty:
        problems.append("support is empty")
    homogeneous = all(dg == p.k for dg in degrees)
    if not homogeneous:
        bad = [dg for dg in degrees if dg != p.k]
        problems.append(f"homogeneity violated: found degrees {degrees}, expected {p.k} (offending {bad})")
    if p.k < 3:
        problems.append(f"k={p.k} < 3 leaves K=2/(k-2) undefined or nonpositive")
    rep = ValidationReport(valid=not problems, homogeneous=homogeneous, empty=empty,
                           degrees=degrees, problems=problems)
    if n is not None and p.k >= 3:
        rep.n = n
        rep.nK = n * p.K
        rep.nM = n * p.M
        rep.admissible = rep.nK.denominator == 1 and rep.nM.denominator == 1
    return rep


def _check_k(k: int) -> None:
    if k < 3:
        raise PotentialError(f"k={k}: need k >= 3 so that K = 2/(k-2) is defined and positive")


def build_ising_master(k: int, J, h) -> Potential:
    """Coloured Ising potential sum_i J^i h^(i mod 2) x1^i x2^(k-i) / (i!(k-i)!).

    J and h are exact rationals.  Two symbolic modes keep the result
    polynomial in lambda: J=SQRT_LAMBDA with h=0 gives the first Ising
    potential (colours swapped so that lambda^0 sits on x1^k), and J=1 with
    h=LAMBDA gives the second.
    """
    _check_k(k)
    if J == SQRT_LAMBDA:
        if h != 0:
            raise PotentialError("J=sqrt(lambda) requires h=0 to stay polynomial in lambda")
        return ising1(k)
    J = as_rational(J)
    if h == LAMBDA:
        lambdas = {}
        for i in range(k + 1):
            lambdas[(i, k - i)] = LambdaPoly.monomial(i % 2, J ** i)
        return Potential(2, k, lambdas)
    h = as_rational(h)
    lambdas = {}
    for i in range(k + 1):
        c = J ** i * (h if i % 2 else 1)
        if c != 0:
            lambdas[(i, k - i)] = LambdaPoly.constant(c)
    return Potential(2, k, lambdas)


def ising1(k: int = 4) -> Potential:
    _check_k(k)
    lambdas = {}
    for i in range(0, k + 1, 2):
        lambdas[(k - i, i)] = LambdaPoly.monomial(i // 2)
    return Potential(2, k, lambdas)


def ising2(k: int = 4) -> Potential:
    return build_ising_master(k, 1, LAMBDA)


def single_monomial(k: int = 4, d: int = 2) -> Potential:
    _check_k(k)
    return Potential(d, k, {(k,) + (0,) * (d - 1): LambdaPoly.constant(1)})


BUILTINS = {"ising1": ising1, "ising2": ising2, "monomial": single_monomial}


def load(path: str | Path) -> Potential:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PotentialError(f"{path}: invalid JSON ({exc})") from None
    return Potential.from_json(data)


def dump(p: Potential, path: str | Path) -> None:
    Path(path).write_text(dumps(p) + "\n")


def dumps(p: Potential) -> str:
    return json.dumps(p.to_json(), sort_keys=True)


def loads(text: str) -> Potential:
    return Potential.from_json(json.loads(text))


def evaluate_exact(p: Potential, x, lam=None):
    """Exact value of V at a rational point x (and lambda if symbolic)."""
    total = Fraction(0)
    for w, c in p.lambdas.items():
        val = c(lam) if lam is not None else c.constant_value()
        mono = Fraction(1)
        for xi, e in zip(x, w):
            mono *= as_rational(xi) ** e
        total += val * mono / multi_factorial(w)
    return total


__all__ = ["Potential", "ValidationReport", "validate", "build_ising_master", "ising1",
           "ising2", "single_monomial", "load", "dump", "dumps", "loads", "PotentialError",
           "SQRT_LAMBDA", "LAMBDA", "BUILTINS", "evaluate_exact"]
