"""Character (exponential) analysis of placement constraints.

Characters are handled multiplicatively through integer exponent vectors over a
list of generators: a row ``e`` stands for ``prod_j g(gen_j) ** e_j``.
Whether a branch of constraints forces a target value to 1 is decided with the
Smith normal form of the stacked relation matrix.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from .configuration import Configuration, rational_sqrt
from .errors import BranchCapExceeded, GadgetFailure
from .exact import I, ONE, GaussRational, IntMatrix, UniPoly, smith_normal_form

DEFAULT_BRANCH_CAP = 1 << 20
GADGET_LENGTH = 12
THREE_FOUR_FIVE = GaussRational(Fraction(3, 5), Fraction(4, 5))


# ---------------------------------------------------------------------------
# relation lattices


def _integer_columns(values: Sequence[GaussRational]) -> list[list[int]]:
    den = 1
    for v in values:
        den = math.lcm(den, v.re.denominator, v.im.denominator)
    return [[int(v.re * den) for v in values], [int(v.im * den) for v in values]]


def integer_relations(values: Sequence[GaussRational]) -> list[list[int]]:
    """A basis of all integer vectors e with sum_j e_j * values_j = 0."""
    m = len(values)
    if m == 0:
        return []
    a = IntMatrix.from_rows(_integer_columns(values), m)
    s, _, v = smith_normal_form(a)
    rank = sum(1 for d in s.diagonal() if d)
    vr = v.to_rows()
    return [[vr[k][j] for k in range(m)] for j in range(rank, m)]


@dataclass(frozen=True)
class RelationLattice:
    generators: tuple[GaussRational, ...]
    exponent_matrix: IntMatrix
    targets: tuple[tuple[int, ...], ...] = ()

    @classmethod
    def from_generators(cls, generators: Sequence[GaussRational],
                        targets: Sequence[Sequence[int]] = ()) -> "RelationLattice":
        gens = tuple(GaussRational.coerce(g) for g in generators)
        rows = integer_relations(gens)
        return cls(gens, IntMatrix.from_rows(rows, len(gens)), tuple(tuple(t) for t in targets))

    @classmethod
    def from_rows(cls, generators, rows, targets=()) -> "RelationLattice":
        gens = tuple(GaussRational.coerce(g) for g in generators)
        return cls(gens, IntMatrix.from_rows(rows, len(gens)), tuple(tuple(t) for t in targets))

    def evaluate(self, exponents: Sequence[int]) -> GaussRational:
        """The additive element sum_j e_j * gen_j."""
        acc = GaussRational(0)
        for e, g in zip(exponents, self.generators):
            if e:
                acc = acc + g * e
        return acc

    def check(self) -> bool:
        """Every row is a genuine additive relation."""
        return all(self.evaluate(r).is_zero() for r in self.exponent_matrix.to_rows())

    def contains_relation(self, row: Sequence[int]) -> bool:
        """Whether ``row`` lies in the row lattice (exact SNF membership)."""
        return _solve_left(self.exponent_matrix, row) is not None


def _solve_left(m: IntMatrix, t: Sequence[int]) -> list[int] | None:
    """Integer c with c @ m == t, or None."""
    s, u, v = smith_normal_form(m)
    coeffs = _solve_with_snf(s, u, v, t)
    return coeffs


def _solve_with_snf(s: IntMatrix, u: IntMatrix, v: IntMatrix, t: Sequence[int]) -> list[int] | None:
    r, m = s.rows, s.cols
    vr = v.to_rows()
    sv = [sum(t[k] * vr[k][j] for k in range(m)) for j in range(m)]
    diag = s.diagonal()
    y = [0] * r
    for j in range(m):
        d = diag[j] if j < len(diag) else 0
        if d == 0:
            if sv[j] != 0:
                return None
        else:
            if sv[j] % d:
                return None
            y[j] = sv[j] // d
    ur = u.to_rows()
    return [sum(y[k] * ur[k][i] for k in range(r)) for i in range(r)]


# ---------------------------------------------------------------------------
# branches


Constraint = tuple[tuple[int, ...], int]  # (exponent vector, forced value +1 or -1)


def _canonical(constraint: Constraint) -> Constraint:
    vec, val = constraint
    vec = tuple(int(x) for x in vec)
    if val not in (1, -1):
        raise ValueError("forced values must be +1 or -1")
    lead = next((x for x in vec if x), 0)
    if lead < 0:  # g(w) = +-1  <=>  g(-w) = +-1
        vec = tuple(-x for x in vec)
    return vec, val


@dataclass(frozen=True)
class CharacterBranch:
    generators: tuple[GaussRational, ...]
    relations: RelationLattice
    unit_constraints: tuple[Constraint, ...]

    def stacked(self) -> tuple[IntMatrix, list[int]]:
        """Relation rows then constraint rows, with their parity bits."""
        rows = self.relations.exponent_matrix.to_rows()
        parity = [0] * len(rows)
        for vec, val in self.unit_constraints:
            rows.append(list(vec))
            parity.append(0 if val == 1 else 1)
        return IntMatrix.from_rows(rows, len(self.generators)), parity


class Status(str, enum.Enum):
    FORCED_TRIVIAL = "FORCED_TRIVIAL"
    ESCAPE = "ESCAPE"


@dataclass(frozen=True)
class EscapeCharacter:
    """Values on generators as ``modulus * exp(pi * i * angle)``, exact."""

    modulus: tuple[Fraction, ...]
    angle: tuple[Fraction, ...]

    def value(self, k: int) -> complex:
        return float(self.modulus[k]) * cmath.exp(1j * math.pi * float(self.angle[k]))

    def exact(self, exponents: Sequence[int]) -> tuple[Fraction, Fraction]:
        """(modulus, angle / pi mod 2) of the value at an exponent vector."""
        mod, ang = Fraction(1), Fraction(0)
        for k, e in enumerate(exponents):
            if e:
                mod *= self.modulus[k] ** e
                ang += self.angle[k] * e
        return mod, ang % 2

    def __call__(self, exponents: Sequence[int]) -> complex:
        mod, ang = self.exact(exponents)
        return float(mod) * cmath.exp(1j * math.pi * float(ang))

    def to_dict(self) -> dict:
        return {
            "generator_values": [
                {"modulus": str(m), "angle_over_pi": str(a),
                 "approx": [self.value(k).real, self.value(k).imag]}
                for k, (m, a) in enumerate(zip(self.modulus, self.angle))
            ]
        }


@dataclass(frozen=True)
class BranchVerdict:
    branch: CharacterBranch
    status: Status
    consistent: bool
    forced: tuple[bool, ...]
    combinations: tuple[tuple[int, ...] | None, ...]
    snf_diagonal: tuple[int, ...]
    character: EscapeCharacter | None = None

    def verify(self) -> bool:
        """Back-substitution: every forced target is the stated integer
        combination of the stacked rows, with even parity."""
        m, parity = self.branch.stacked()
        rows = m.to_rows()
        for target, forced, comb in zip(self.branch.relations.targets, self.forced, self.combinations):
            if not forced or not self.consistent:
                continue
            if comb is None:
                return False
            got = [sum(c * r[j] for c, r in zip(comb, rows)) for j in range(m.cols)]
            if got != list(target):
                return False
            if sum(c * p for c, p in zip(comb, parity)) % 2:
                return False
        return True


def decide_branch(branch: CharacterBranch) -> BranchVerdict:
    m, parity = branch.stacked()
    s, u, v = smith_normal_form(m)
    diag = s.diagonal()
    rank = sum(1 for d in diag if d)
    ur = u.to_rows()
    beta = [sum(ur[j][i] * parity[i] for i in range(m.rows)) for j in range(m.rows)]
    consistent = all(beta[j] % 2 == 0 for j in range(rank, m.rows))
    targets = branch.relations.targets
    if not consistent:
        return BranchVerdict(branch, Status.FORCED_TRIVIAL, False, tuple(True for _ in targets),
                             tuple(None for _ in targets), tuple(diag))
    forced, combos = [], []
    for t in targets:
        comb = _solve_with_snf(s, u, v, t)
        ok = comb is not None and sum(c * p for c, p in zip(comb, parity)) % 2 == 0
        forced.append(ok)
        combos.append(comb if comb is not None else None)
    status = Status.FORCED_TRIVIAL if all(forced) else Status.ESCAPE
    character = None
    if status is Status.ESCAPE:
        bad = targets[forced.index(False)]
        character = _escape_character(m.cols, diag, rank, beta, v, bad)
    return BranchVerdict(branch, status, True, tuple(forced),
                         tuple(tuple(c) if c is not None else None for c in combos), tuple(diag),
                         character)


def _escape_character(ncols, diag, rank, beta, v: IntMatrix, target) -> EscapeCharacter:
    # theta_j = modulus_j * exp(pi i angle_j) in the SNF coordinates z = x @ V
    modulus = [Fraction(1)] * ncols
    angle = [Fraction(0)] * ncols
    for j in range(rank):
        angle[j] = Fraction(beta[j], diag[j])
    vr = v.to_rows()
    s = [sum(target[k] * vr[k][j] for k in range(ncols)) for j in range(ncols)]

    def target_is_one():
        mod = Fraction(1)
        ang = Fraction(0)
        for j in range(ncols):
            mod *= modulus[j] ** s[j]
            ang += angle[j] * s[j]
        return mod == 1 and ang % 2 == 0

    if target_is_one():
        free = next((j for j in range(rank, ncols) if s[j]), None)
        if free is not None:
            modulus[free] = Fraction(2)
        else:
            j = next(j for j in range(rank) if s[j] % diag[j])
            angle[j] += Fraction(2, diag[j])
    assert not target_is_one()
    gen_mod, gen_ang = [], []
    for k in range(ncols):
        mod, ang = Fraction(1), Fraction(0)
        for j in range(ncols):
            e = vr[k][j]
            if e:
                mod *= modulus[j] ** e
                ang += angle[j] * e
        gen_mod.append(mod)
        gen_ang.append(ang % 2)
    return EscapeCharacter(tuple(gen_mod), tuple(gen_ang))


@dataclass(frozen=True)
class TrivialityCertificate:
    lattice: RelationLattice
    disjunctions: tuple[tuple[Constraint, ...], ...]
    verdicts: tuple[BranchVerdict, ...]

    @property
    def status(self) -> Status:
        if all(v.status is Status.FORCED_TRIVIAL for v in self.verdicts):
            return Status.FORCED_TRIVIAL
        return Status.ESCAPE

    @property
    def escape(self) -> BranchVerdict | None:
        return next((v for v in self.verdicts if v.status is Status.ESCAPE), None)

    def verify(self) -> bool:
        return self.lattice.check() and all(v.verify() for v in self.verdicts)

    def to_dict(self) -> dict:
        out = {
            "verdict": self.status.value,
            "generators": [g.to_strings() for g in self.lattice.generators],
            "relations": self.lattice.exponent_matrix.to_rows(),
            "targets": [list(t) for t in self.lattice.targets],
            "branches": [
                {
                    "constraints": [{"exponents": list(vec), "value": val}
                                    for vec, val in v.branch.unit_constraints],
                    "status": v.status.value,
                    "consistent": v.consistent,
                    "snf_diagonal": list(v.snf_diagonal),
                }
                for v in self.verdicts
            ],
            "snf_diagonal": list(self.verdicts[0].snf_diagonal) if self.verdicts else [],
        }
        esc = self.escape
        if esc is not None:
            out["witness_character"] = esc.character.to_dict()
        return out


def snf_triviality_certificate(lattice: RelationLattice,
                               disjunctions: Sequence[Sequence[Constraint]],
                               branch_cap: int = DEFAULT_BRANCH_CAP) -> TrivialityCertificate:
    """Decide, for every way of picking one constraint per disjunction,
    whether the lattice targets are forced to have character value 1."""
    seen, disj = set(), []
    for d in disjunctions:
        alts = tuple(dict.fromkeys(_canonical(c) for c in d))
        key = frozenset(alts)
        if key not in seen:
            seen.add(key)
            disj.append(alts)
    total = math.prod(len(d) for d in disj)
    if total > branch_cap:
        raise BranchCapExceeded(f"{total} branch combinations exceed the cap {branch_cap}")
    verdicts = []
    for choice in product(*disj):
        constraints = tuple(dict.fromkeys(choice))
        branch = CharacterBranch(lattice.generators, lattice, constraints)
        verdicts.append(decide_branch(branch))
    return TrivialityCertificate(lattice, tuple(disj), tuple(verdicts))


# ---------------------------------------------------------------------------
# factorizations of four-point sums


@dataclass(frozen=True)
class BranchFactorization:
    """``g(x) * (1 + s X)(1 + s Y)`` with ``X = g(a y)``, ``Y = g(b y)``;
    ``s = +1`` for the parallelogram sum, ``-1`` for the alternating one."""

    kind: str
    origin: GaussRational
    a: GaussRational
    b: GaussRational
    sign: int
    order: tuple[int, int, int, int]

    @property
    def forced_value(self) -> int:
        return -self.sign

    def disjunction(self, y: GaussRational = ONE) -> list[tuple[GaussRational, int]]:
        """Either g(a y) or g(b y) takes the forced value."""
        return [(self.a * y, self.forced_value), (self.b * y, self.forced_value)]

    def expanded(self) -> dict[tuple[int, int], int]:
        """Coefficients of the product in the monomials X**i * Y**j."""
        out: dict[tuple[int, int], int] = {}
        for (i, ci), (j, cj) in product(((0, 1), (1, self.sign)), repeat=2):
            out[(i, j)] = out.get((i, j), 0) + ci * cj
        return out


def _character_sum(c: Configuration, fac: BranchFactorization) -> dict[tuple[int, int], GaussRational]:
    o, i, j, k = fac.order
    w0 = c.weights[o]
    return {(0, 0): c.weights[o] / w0, (1, 0): c.weights[i] / w0,
            (0, 1): c.weights[j] / w0, (1, 1): c.weights[k] / w0}


def branch_factorization(c: Configuration) -> BranchFactorization | None:
    """Recognize ``{0, a, b, a+b}`` with equal weights (parallelogram) or
    weights ``(w, -w, -w, w)`` (alternating square relation)."""
    if len(c.points) != 4:
        return None
    pts, ws = c.points, c.weights
    for o in range(4):
        others = [k for k in range(4) if k != o]
        for x in range(3):
            for y in range(x + 1, 3):
                i, j = others[x], others[y]
                k = next(t for t in others if t not in (i, j))
                a, b = pts[i] - pts[o], pts[j] - pts[o]
                if pts[k] - pts[o] != a + b:
                    continue
                if ws[o].is_zero():
                    continue
                if ws[i] == ws[o] and ws[j] == ws[o] and ws[k] == ws[o]:
                    kind, sign = "parallelogram", 1
                elif ws[k] == ws[o] and ws[i] == -ws[o] and ws[j] == -ws[o]:
                    kind, sign = "alternating", -1
                else:
                    continue
                fac = BranchFactorization(kind, pts[o], a, b, sign, (o, i, j, k))
                return fac
    return None


def factorization_identity_holds(c: Configuration, fac: BranchFactorization) -> bool:
    """The expanded product equals the normalized four-term character sum."""
    expanded = {k: GaussRational(v) for k, v in fac.expanded().items()}
    return expanded == _character_sum(c, fac)


# ---------------------------------------------------------------------------
# direction gadget


@dataclass(frozen=True)
class DirectionGadget:
    scale: Fraction
    points: tuple[GaussRational, ...]
    steps: tuple[GaussRational, ...]
    decompositions: tuple[tuple[int, ...], ...]
    units: tuple[GaussRational, ...]

    def check(self) -> bool:
        if any(a.norm2() != GADGET_LENGTH ** 2 for a in self.steps):
            return False
        if any(u.norm2() != 1 for u in self.units):
            return False
        for p, dec in zip(self.points, self.decompositions):
            if sum((self.steps[k] for k in dec), GaussRational(0)) != p:
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "scale": str(self.scale),
            "steps": [a.to_strings() for a in self.steps],
            "decompositions": [list(d) for d in self.decompositions],
            "units": [u.to_strings() for u in self.units],
        }


def _axis_steps(m: int, n: int) -> list[GaussRational]:
    L = GADGET_LENGTH
    out = [GaussRational(L if m > 0 else -L)] * abs(m)
    out += [GaussRational(0, L if n > 0 else -L)] * abs(n)
    return out


def _split_point(x: GaussRational) -> list[GaussRational] | None:
    L = GADGET_LENGTH
    if x.is_zero():
        return []
    length = rational_sqrt(x.norm2())
    if length is not None and (length / L).denominator == 1:
        k = int(length / L)
        return [x / k] * k
    mx, my = int(x.re / L), int(x.im / L)  # truncation toward zero
    r = x - GaussRational(L * mx, L * my)
    steps = _axis_steps(mx, my)
    if r.is_zero():
        return steps
    for m in range(-2, 3):
        for n in range(-2, 3):
            w = r - GaussRational(L * m, L * n)
            if w.norm2() == L * L:
                return steps + [w] + _axis_steps(m, n)
    return None


def direction_gadget(c: Configuration | Sequence, rescale: bool = True) -> DirectionGadget:
    """Length-12 steps whose subset sums reach every point, and the unit set
    ``{u, u i, v, v i}`` with ``u = a/12``, ``v = u (3 + 4i)/5``."""
    pts = c.points if isinstance(c, Configuration) else tuple(GaussRational.coerce(p) for p in c)
    scale = Fraction(1)
    splits = [_split_point(p) for p in pts]
    if any(s is None for s in splits):
        if not rescale:
            bad = pts[splits.index(None)]
            raise GadgetFailure(f"point {bad} has no exact length-12 decomposition")
        den = 1
        for p in pts:
            den = math.lcm(den, p.re.denominator, p.im.denominator)
        scale = Fraction(GADGET_LENGTH * den)
        pts = tuple(p * scale for p in pts)
        splits = [_split_point(p) for p in pts]
        assert all(s is not None for s in splits)
    steps, decs = [], []
    for s in splits:
        decs.append(tuple(range(len(steps), len(steps) + len(s))))
        steps.extend(s)
    units: list[GaussRational] = []
    for a in steps:
        u = a / GADGET_LENGTH
        v = u * THREE_FOUR_FIVE
        for w in (u, u * I, v, v * I):
            if w not in units:
                units.append(w)
    return DirectionGadget(scale, pts, tuple(steps), tuple(decs), tuple(units))


class _Registry:
    """Generators identified up to sign."""

    def __init__(self):
        self.values: list[GaussRational] = []

    def vector(self, w: GaussRational) -> list[int]:
        for k, g in enumerate(self.values):
            if g == w:
                return self._unit(k, 1)
            if g == -w:
                return self._unit(k, -1)
        self.values.append(w)
        return self._unit(len(self.values) - 1, 1)

    def _unit(self, k: int, sign: int) -> list[int]:
        return [sign if j == k else 0 for j in range(k + 1)]


def _pad(vec: list[int], n: int) -> tuple[int, ...]:
    return tuple(vec + [0] * (n - len(vec)))


def gadget_branches(gadget: DirectionGadget,
                    fac: BranchFactorization | None = None) -> tuple[RelationLattice, list[list[Constraint]]]:
    """Lattice over the gadget generators with the point targets, and one
    disjunction per unit from the square factorization ``(1 - g(u))(1 - g(u i))``."""
    if fac is None:
        square = Configuration([0, 1, I, 1 + I], [1, -1, -1, 1])
        fac = branch_factorization(square)
    reg = _Registry()
    for u in gadget.units:
        reg.vector(u)
        for w, _ in fac.disjunction(u):
            reg.vector(w)
    step_vecs = [reg.vector(a) for a in gadget.steps]
    raw_disj = [[(reg.vector(w), val) for w, val in fac.disjunction(u)] for u in gadget.units]
    n = len(reg.values)
    targets = []
    for dec in gadget.decompositions:
        t = [0] * n
        for k in dec:
            for j, e in enumerate(step_vecs[k]):
                t[j] += e
        targets.append(tuple(t))
    lattice = RelationLattice.from_generators(reg.values, targets)
    disj = [[(_pad(vec, n), val) for vec, val in d] for d in raw_disj]
    return lattice, disj


# ---------------------------------------------------------------------------
# root sets and the pigeonhole order argument


@dataclass(frozen=True)
class RootSet:
    polynomial: UniPoly
    nonzero_root_count_bound: int

    @property
    def nonzero_part(self) -> UniPoly:
        """p divided by the largest power of x dividing it."""
        return UniPoly(self.polynomial.coeffs[self.polynomial.trailing_zero_order():])

    def contains(self, z: complex, tol: float = 1e-9) -> bool:
        return abs(z) > tol and abs(self.polynomial.eval_complex(z)) <= tol


def lambda_root_set(weights: Sequence) -> RootSet:
    """``p(x) = sum_j beta_j x**(j-1)``; its nonzero roots number at most deg p."""
    p = UniPoly(weights)
    if p.is_zero():
        raise ValueError("all weights are zero")
    return RootSet(p, p.degree)


def _congruence_solutions(a: int, b: int, q: int) -> np.ndarray:
    """All k in [0, q) with a*k = b (mod q)."""
    g = math.gcd(a, q)
    if b % g:
        return np.empty(0, dtype=np.int64)
    q2 = q // g
    k0 = (b // g) * pow(a // g, -1, q2) % q2 if q2 > 1 else 0
    return k0 + q2 * np.arange(g, dtype=np.int64)


@lru_cache(maxsize=None)
def _order_ok(order: int, chain_length: int) -> bool:
    for a in range(order):
        if math.gcd(a, order) != 1:
            continue
        # c = exp(2 pi i a / order); roots of unity are angles k / q
        for nu in range(1, chain_length + 1):
            for mu in range(nu + 1, chain_length + 1):
                q = order * nu * mu
                ks = _congruence_solutions(nu, a * (q // order), q)
                hit = ks[(mu * ks) % q == a * (q // order)]
                if hit.size and ((mu - nu) * a) % order:
                    return False
        for s in range(1, chain_length):
            if (s * a) % order:
                continue
            for r in range(1, chain_length + 1):
                for t in range(r + 1, chain_length + 1):
                    q = order * s ** t
                    rhs = a * (q // order)
                    bs = _congruence_solutions(s ** r, rhs, q)
                    hit = bs[(s ** t * bs) % q == rhs]
                    if hit.size and a % order:
                        return False
    return True


def pigeonhole_order_check(s_bound: int, chain_length: int) -> bool:
    """Exhaustive check of the order argument on roots of unity of order at
    most ``s_bound``: a repeat ``g(x/nu) = g(x/mu)`` forces ``c**(mu-nu) = 1``,
    and a repeat along ``g(x/s**t)`` with ``c**s = 1`` forces ``c = 1``."""
    if s_bound < 1 or chain_length < 2:
        raise ValueError("need s_bound >= 1 and chain_length >= 2")
    return all(_order_ok(o, chain_length) for o in range(1, s_bound + 1))
