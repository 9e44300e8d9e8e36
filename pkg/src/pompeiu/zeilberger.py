"""Linear sets under isometries of the line, and annihilating characters for
finite subsets of Z^n under translations."""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exact import UniPoly, poly_eval, poly_gcd

MILLER_RABIN_ROUNDS = 64  # error <= 4**-64 = 2**-128


@dataclass(frozen=True)
class LinearSet:
    positions: tuple[int, ...]

    def __post_init__(self):
        pos = tuple(int(z) for z in self.positions)
        if not pos or pos[0] != 0:
            raise ValueError("a linear set starts at 0")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("linear set positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)

    @classmethod
    def normalized(cls, integers: Sequence[int]) -> "LinearSet":
        """Sort, deduplicate and shift so the smallest element is 0."""
        vals = sorted(set(int(z) for z in integers))
        return cls(tuple(z - vals[0] for z in vals))

    @property
    def span(self) -> int:
        return self.positions[-1]

    def reverse(self) -> "LinearSet":
        return LinearSet(tuple(sorted(self.span - z for z in self.positions)))

    def is_symmetric(self) -> bool:
        return self.reverse() == self


class Verdict(str, enum.Enum):
    POMPEIU = "POMPEIU"
    NOT_POMPEIU = "NOT_POMPEIU"


@dataclass(frozen=True)
class LinearVerdict:
    verdict: Verdict
    gcd: UniPoly
    p: UniPoly
    q: UniPoly

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "gcd_coefficients": self.gcd.to_strings(),
            "p_coefficients": self.p.to_strings(),
            "q_coefficients": self.q.to_strings(),
        }


def mask_polynomials(s: LinearSet) -> tuple[UniPoly, UniPoly]:
    p = UniPoly.from_exponents(s.positions)
    q = UniPoly.from_exponents(s.span - z for z in s.positions)
    return p, q


def linear_pompeiu_check(s: LinearSet) -> LinearVerdict:
    """POMPEIU (w.r.t. isometries of R) iff the mask polynomials are coprime."""
    p, q = mask_polynomials(s)
    g = poly_gcd(p, q)
    verdict = Verdict.POMPEIU if g.degree == 0 else Verdict.NOT_POMPEIU
    return LinearVerdict(verdict, g, p, q)


def is_probable_prime(n: int, rounds: int = MILLER_RABIN_ROUNDS, seed: int = 0x5EED) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    rng = random.Random(seed ^ n)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def irreducibility_heuristic(p: UniPoly, n_max: int) -> int | None:
    """Smallest n in [3, n_max] with p(n) prime, certifying p irreducible
    (for 0/1 coefficients). None is inconclusive."""
    if any(c not in (0, 1) for c in p.coeffs):
        raise ValueError("irreducibility heuristic needs 0/1 coefficients")
    if n_max < 3:
        raise ValueError("n_max must be at least 3")
    for n in range(3, n_max + 1):
        if is_probable_prime(int(poly_eval(p, n))):
            return n
    return None


# ---------------------------------------------------------------------------
# witnesses


@dataclass(frozen=True)
class AlgebraicValue:
    """A root of ``minpoly`` singled out by a double-precision approximation."""

    minpoly: UniPoly
    approx: complex

    def to_dict(self) -> dict:
        return {"minpoly": self.minpoly.to_strings(),
                "lambda_approx": [self.approx.real, self.approx.imag]}


@dataclass(frozen=True)
class WitnessCharacter:
    """The character ``x -> prod_j values[j] ** x[j]``; only ``coordinate``
    carries a value different from 1."""

    dimension: int
    coordinate: int
    values: tuple  # Fraction or AlgebraicValue per coordinate
    points: tuple[tuple[int, ...], ...]

    @property
    def root(self):
        return self.values[self.coordinate]

    @property
    def is_exact(self) -> bool:
        return isinstance(self.root, Fraction)

    def induced_polynomial(self) -> UniPoly:
        exps = [e[self.coordinate] for e in self.points]
        lo = min(exps)
        return UniPoly.from_exponents(e - lo for e in exps)

    def verify(self) -> bool:
        """Exact check that the character annihilates the point set."""
        poly = self.induced_polynomial()
        root = self.root
        if isinstance(root, Fraction):
            return root != 0 and poly_eval(poly, root) == 0
        return root.minpoly[0] != 0 and root.minpoly.divides(poly)

    def __call__(self, x: Sequence[int]) -> complex:
        z = complex(self.root.approx) if not self.is_exact else complex(self.root)
        return z ** int(x[self.coordinate])

    def exact_value(self, x: Sequence[int]) -> Fraction:
        if not self.is_exact:
            raise TypeError("character value is not rational")
        return self.root ** int(x[self.coordinate])

    def description(self) -> str:
        lam = str(self.root) if self.is_exact else f"root of {self.root.minpoly}"
        return f"x -> ({lam})**x[{self.coordinate}]"

    def to_dict(self) -> dict:
        if self.is_exact:
            witness = {"minpoly": UniPoly([-self.root, 1]).to_strings(),
                       "lambda_exact": str(self.root),
                       "lambda_approx": [float(self.root), 0.0]}
        else:
            witness = self.root.to_dict()
        witness.update(dimension=self.dimension, coordinate=self.coordinate,
                       description=self.description())
        return witness


def _divisors(n: int) -> list[int]:
    n = abs(n)
    return [d for d in range(1, n + 1) if n % d == 0]


def rational_roots(p: UniPoly) -> list[Fraction]:
    """Nonzero rational roots of p, sorted by absolute value, negatives first."""
    if p.is_zero():
        raise ValueError("zero polynomial")
    k = p.trailing_zero_order()
    p = UniPoly(p.coeffs[k:])
    den = math.lcm(*(c.denominator for c in p.coeffs))
    ints = [int(c * den) for c in p.coeffs]
    if len(ints) == 1:
        return []
    cands = {Fraction(s * a, b) for a in _divisors(ints[0]) for b in _divisors(ints[-1])
             for s in (-1, 1)}
    return sorted((r for r in cands if poly_eval(p, r) == 0), key=lambda r: (abs(r), r))


def _irreducible_factors(p: UniPoly) -> list[UniPoly]:
    import sympy

    x = sympy.Symbol("x")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * x**k for k, c in enumerate(p.coeffs))
    _, factors = sympy.factor_list(expr, x, domain="QQ")
    out = []
    for f, _mult in factors:
        cs = sympy.Poly(f, x).all_coeffs()[::-1]
        out.append(UniPoly(Fraction(int(c.p), int(c.q)) for c in cs).monic())
    return out


def choose_root(p: UniPoly):
    """A nonzero root of p: exact when rational, else (minpoly, approximation)."""
    rats = rational_roots(p)
    if rats:
        return rats[0]
    factors = [f for f in _irreducible_factors(p) if f.degree >= 1 and f[0] != 0]
    factors.sort(key=lambda f: (f.degree, f.coeffs))
    f = factors[0]
    roots = np.roots([float(c) for c in reversed(f.coeffs)])
    roots = sorted(roots, key=lambda z: (-round(z.real, 12), -round(z.imag, 12)))
    return AlgebraicValue(f, complex(roots[0]))


def translation_witness(points: Sequence[Sequence[int]]) -> WitnessCharacter:
    """A character annihilating every translate of ``points`` in Z^n."""
    pts = tuple(tuple(int(v) for v in p) for p in points)
    if len(pts) < 2:
        raise ValueError("need at least two points")
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise ValueError("points differ in dimension")
    for j in range(n):
        if len({p[j] for p in pts}) >= 2:
            break
    else:  # pragma: no cover - distinct points always differ somewhere
        raise AssertionError("unreachable")
    exps = [p[j] for p in pts]
    lo = min(exps)
    poly = UniPoly.from_exponents(e - lo for e in exps)
    root = choose_root(poly)
    values = tuple(root if k == j else Fraction(1) for k in range(n))
    witness = WitnessCharacter(n, j, values, pts)
    assert witness.verify()
    return witness
