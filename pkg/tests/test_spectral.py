import cmath
import math

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from pompeiu.configuration import Configuration, MotionGroup, Window, pythagorean_units
from pompeiu.errors import BranchCapExceeded, GadgetFailure
from pompeiu.exact import I, GaussRational, UniPoly
from pompeiu.gridlab import assemble_constraints
from pompeiu.spectral import (THREE_FOUR_FIVE, RelationLattice, Status, branch_factorization,
                              direction_gadget, factorization_identity_holds, gadget_branches,
                              integer_relations, lambda_root_set, pigeonhole_order_check,
                              snf_triviality_certificate)

G = GaussRational
U, UI = G(1), I
V, VI = THREE_FOUR_FIVE, THREE_FOUR_FIVE * I
GADGET_LATTICE = RelationLattice.from_generators([U, UI, V, VI, U * 12], [(0, 0, 0, 0, 1)])


def test_parallelogram_factorization():
    c = Configuration([0, 1, I, 1 + I])
    fac = branch_factorization(c)
    assert fac.kind == "parallelogram" and fac.forced_value == -1
    assert fac.expanded() == {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}
    assert factorization_identity_holds(c, fac)


def test_alternating_square_factorization():
    c = Configuration([0, 1, I, 1 + I], [1, -1, -1, 1])
    fac = branch_factorization(c)
    assert fac.kind == "alternating" and fac.forced_value == 1
    assert fac.expanded() == {(0, 0): 1, (1, 0): -1, (0, 1): -1, (1, 1): 1}
    assert [w for w, _ in fac.disjunction(U)] == [U, UI]
    assert factorization_identity_holds(c, fac)


def test_generic_quadrangle_has_no_factorization():
    assert branch_factorization(Configuration([0, 1, I, 2 + I])) is None
    assert branch_factorization(Configuration([0, 1, I])) is None


def test_symbolic_expansion_matches_sympy():
    X, Y = sympy.symbols("X Y")
    for sign in (1, -1):
        c = Configuration([0, 1, I, 1 + I], [1, -sign, -sign, 1] if sign < 0 else [1, 1, 1, 1])
        fac = branch_factorization(c)
        poly = sympy.Poly(sympy.expand((1 + fac.sign * X) * (1 + fac.sign * Y)), X, Y)
        assert {m: int(v) for m, v in zip(poly.monoms(), poly.coeffs())} == fac.expanded()


@given(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), st.tuples(st.integers(-3, 3), st.integers(-3, 3)),
       st.tuples(st.integers(-3, 3), st.integers(-3, 3)), st.integers(1, 3), st.permutations(range(4)))
@settings(max_examples=60, deadline=None)
def test_factorization_identity_on_shuffled_parallelograms(o, a, b, w, perm):
    o, a, b = G(*o), G(*a), G(*b)
    pts = [o, o + a, o + b, o + a + b]
    if len(set(pts)) < 4:
        return
    c = Configuration([pts[i] for i in perm], [w] * 4)
    fac = branch_factorization(c)
    assert fac is not None and factorization_identity_holds(c, fac)


def test_gadget_examples():
    g = direction_gadget([24], rescale=False)
    assert g.steps == (G(12), G(12)) and g.units[0] == U
    g = direction_gadget([12 * I], rescale=False)
    assert g.steps == (12 * I,)
    assert g.units[2] == I * THREE_FOUR_FIVE == G(-4, 3) / 5
    g = direction_gadget([G(36, 48)], rescale=False)
    assert g.steps == (G(12) * THREE_FOUR_FIVE,) * 5
    with pytest.raises(GadgetFailure):
        direction_gadget([G(1, 2)], rescale=False)


@given(st.lists(st.tuples(st.fractions(-9, 9, max_denominator=4), st.fractions(-9, 9, max_denominator=4)),
                min_size=1, max_size=5, unique=True))
@settings(max_examples=60, deadline=None)
def test_gadget_invariants(points):
    g = direction_gadget([G(a, b) for a, b in points])
    assert all(a.norm2() == 144 for a in g.steps)
    assert all(u.norm2() == 1 for u in g.units)
    assert g.check()


def test_integer_relations_are_relations():
    gens = [U, UI, V, VI, U * 12, G(3, 4)]
    rows = integer_relations(gens)
    assert len(rows) == len(gens) - 2
    lat = RelationLattice.from_rows(gens, rows)
    assert lat.check()


def test_certificate_u_i_then_v():
    cert = snf_triviality_certificate(GADGET_LATTICE, [[((0, 1, 0, 0, 0), 1)], [((0, 0, 1, 0, 0), 1)]])
    assert cert.status is Status.FORCED_TRIVIAL and cert.verify()


def test_certificate_u_i_then_v_i():
    cert = snf_triviality_certificate(GADGET_LATTICE, [[((0, 1, 0, 0, 0), 1)], [((0, 0, 0, 1, 0), 1)]])
    assert cert.status is Status.FORCED_TRIVIAL and cert.verify()


def test_unconstrained_generator_escapes():
    lat = RelationLattice.from_rows([U, U * 12], [[12, -1]], [(0, 1)])
    cert = snf_triviality_certificate(lat, [])
    assert cert.status is Status.ESCAPE
    chi = cert.escape.character
    assert abs(chi((12, -1)) - 1) < 1e-9
    assert abs(chi((0, 1)) - 1) > 1e-3
    assert "witness_character" in cert.to_dict()


def test_branch_cap():
    disj = [[((1, 0), 1), ((0, 1), 1)], [((2, 0), 1), ((0, 2), 1)], [((3, 0), 1), ((0, 3), 1)]]
    lat = RelationLattice.from_rows([U, I], [], [(1, 1)])
    with pytest.raises(BranchCapExceeded):
        snf_triviality_certificate(lat, disj, branch_cap=7)
    assert len(snf_triviality_certificate(lat, disj, branch_cap=8).verdicts) == 8


def test_duplicate_disjunctions_collapse():
    lat = RelationLattice.from_rows([U, I], [], [(1, 1)])
    d = [((1, 0), 1), ((0, 1), 1)]
    flipped = [((-1, 0), 1), ((0, -1), 1)]
    assert len(snf_triviality_certificate(lat, [d, d, flipped]).verdicts) == 2


def test_minus_one_constraint_parity():
    lat = RelationLattice.from_rows([U], [], [(2,), (1,)])
    cert = snf_triviality_certificate(lat, [[((1,), -1)]])
    v = cert.verdicts[0]
    assert v.forced == (True, False) and v.status is Status.ESCAPE
    assert abs(v.character((1,)) + 1) < 1e-12


def test_inconsistent_branch_is_vacuous():
    lat = RelationLattice.from_rows([U], [], [(1,)])
    v = snf_triviality_certificate(lat, [[((1,), 1)], [((1,), -1)]]).verdicts[0]
    assert not v.consistent and v.status is Status.FORCED_TRIVIAL


@given(st.lists(st.sampled_from(pythagorean_units(3)), min_size=1, max_size=3, unique=True),
       st.lists(st.tuples(st.integers(-2, 2), st.integers(0, 1)), min_size=1, max_size=3))
@settings(max_examples=40, deadline=None)
def test_certificate_soundness_and_escape_validity(units, picks):
    gens = list(dict.fromkeys([g for u in units for g in (u, u * I)]))
    n = len(gens)
    lat = RelationLattice.from_generators(gens, [tuple(1 for _ in gens)])
    disj = []
    for k, val in picks:
        vec = [0] * n
        vec[abs(k) % n] = 1 if k >= 0 else -1
        disj.append([(tuple(vec), 1 - 2 * val)])
    cert = snf_triviality_certificate(lat, disj)
    assert cert.verify()
    for v in cert.verdicts:
        if v.status is Status.ESCAPE:
            m, parity = v.branch.stacked()
            for row, p in zip(m.to_rows(), parity):
                assert v.character.exact(row) == (1, p)
            bad = v.branch.relations.targets[v.forced.index(False)]
            assert v.character.exact(bad) != (1, 0)


def test_escape_character_gives_kernel_vector():
    # f(x) + f(x+1) = 0 forces g(1) = -1; the escape character is (-1)**x
    lat = RelationLattice.from_rows([U], [], [(1,)])
    cert = snf_triviality_certificate(lat, [[((1,), -1)]])
    chi = cert.escape.character
    w = Window(1, (0, 9), (0, 0))
    cs = assemble_constraints(Configuration([0, 1]), MotionGroup(), w)
    vec = [chi((int(z.re),)) for z in w.points()]
    assert cs.relative_residual(vec) < 1e-9


def test_tfourrac_gadget_certificate():
    c = Configuration([0, 2, G(1, 2), G(3, 1)], [1, 1, 1, 2])
    lat, disj = gadget_branches(direction_gadget(c))
    assert lat.check()
    cert = snf_triviality_certificate(lat, disj)
    assert cert.status is Status.FORCED_TRIVIAL and cert.verify()


def test_root_sets():
    r = lambda_root_set([1, 1])
    assert r.polynomial == UniPoly([1, 1]) and r.nonzero_root_count_bound == 1 and r.contains(-1)
    assert lambda_root_set([1, 1, 1]).nonzero_root_count_bound == 2
    r = lambda_root_set([0, 1])
    assert r.nonzero_part.degree == 0 and not r.contains(0)
    with pytest.raises(ValueError):
        lambda_root_set([0, 0])


def test_pigeonhole_examples():
    assert pigeonhole_order_check(1, 2)
    assert pigeonhole_order_check(4, 6)
    assert pigeonhole_order_check(2, 2)
    with pytest.raises(ValueError):
        pigeonhole_order_check(0, 3)
