from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from pompeiu.exact import (GaussRational, IntMatrix, UniPoly, poly_eval, poly_gcd,
                           pythagorean_unit, smith_normal_form)

small = st.integers(-6, 6)
polys = st.lists(small, min_size=1, max_size=6).map(UniPoly)
nonzero_polys = polys.filter(lambda p: not p.is_zero())


def test_gcd_coprime_masks():
    assert poly_gcd(UniPoly([1, 1, 0, 1]), UniPoly([1, 0, 1, 1])) == UniPoly([1])


def test_gcd_shared_linear_factor():
    assert poly_gcd(UniPoly([1, 1]), UniPoly([1, 0, -1])) == UniPoly([1, 1])


def test_gcd_with_itself_is_monic():
    p = UniPoly([2, 4, 6])
    assert poly_gcd(p, p) == p.monic()


def test_gcd_of_zeros():
    assert poly_gcd(UniPoly(), UniPoly()).is_zero()


@given(polys, polys, nonzero_polys)
@settings(max_examples=60, deadline=None)
def test_planted_factor_divides_gcd(a, b, f):
    g = poly_gcd(a * f, b * f)
    assert f.divides(g)


@given(polys, polys)
@settings(max_examples=60, deadline=None)
def test_gcd_divides_both_and_matches_sympy(a, b):
    g = poly_gcd(a, b)
    if not g.is_zero():
        assert g.divides(a) and g.divides(b)
    x = sympy.Symbol("x")
    ref = sympy.Poly(sympy.gcd(sum(int(c) * x**k for k, c in enumerate(a.coeffs)),
                               sum(int(c) * x**k for k, c in enumerate(b.coeffs))), x)
    if g.is_zero():
        assert ref.is_zero
    else:
        assert g.degree == ref.degree()


def test_poly_eval_examples():
    p = UniPoly([1, 1, 0, 1])
    assert poly_eval(p, 3) == 31
    assert poly_eval(p, 0) == 1
    assert poly_eval(UniPoly(), Fraction(7, 3)) == 0


@given(polys, st.fractions(max_denominator=20))
@settings(max_examples=50, deadline=None)
def test_poly_eval_matches_naive_sum(p, x):
    assert poly_eval(p, x) == sum(c * x**k for k, c in enumerate(p.coeffs))


def test_snf_diagonal_example():
    s, u, v = smith_normal_form(IntMatrix.from_rows([[2, 0], [0, 3]]))
    assert s.diagonal() == [1, 6]


def test_snf_identity_and_scalar():
    s, _, _ = smith_normal_form(IntMatrix.identity(3))
    assert s == IntMatrix.identity(3)
    s, _, _ = smith_normal_form(IntMatrix.from_rows([[12]]))
    assert s.to_rows() == [[12]]


int_matrices = st.integers(1, 4).flatmap(
    lambda r: st.integers(1, 4).flatmap(
        lambda c: st.lists(st.lists(st.integers(-9, 9), min_size=c, max_size=c),
                           min_size=r, max_size=r)))


@given(int_matrices)
@settings(max_examples=80, deadline=None)
def test_snf_recomposes_and_divides(rows):
    m = IntMatrix.from_rows(rows)
    s, u, v = smith_normal_form(m)
    assert u @ m @ v == s
    assert abs(u.determinant()) == 1 and abs(v.determinant()) == 1
    d = s.diagonal()
    for i in range(s.rows):
        for j in range(s.cols):
            if i != j:
                assert s[i, j] == 0
    assert all(x >= 0 for x in d)
    nz = [x for x in d if x]
    assert d[:len(nz)] == nz
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    ref = sympy.Matrix(rows)
    if nz:
        # product of invariant factors equals the gcd of maximal nonzero minors
        from sympy.matrices.normalforms import smith_normal_form as ref_snf
        rd = [abs(x) for x in ref_snf(ref, domain=sympy.ZZ).diagonal() if x]
        assert sorted(rd) == sorted(nz)


def test_pythagorean_unit_examples():
    assert pythagorean_unit(2, 1) == GaussRational(Fraction(3, 5), Fraction(4, 5))
    assert pythagorean_unit(1, 0) == GaussRational(1)
    assert pythagorean_unit(1, 1) == GaussRational(0, 1)
    with pytest.raises(ValueError):
        pythagorean_unit(0, 0)


def test_pythagorean_units_are_unimodular_up_to_50():
    for m in range(-50, 51):
        for n in range(-50, 51):
            if m or n:
                assert pythagorean_unit(m, n).norm2() == 1


gauss = st.builds(GaussRational, st.fractions(max_denominator=9), st.fractions(max_denominator=9))


@given(gauss, gauss, gauss)
@settings(max_examples=60, deadline=None)
def test_gauss_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b).norm2() == a.norm2() * b.norm2()
    if not b.is_zero():
        assert (a / b) * b == a
    assert a.conjugate().conjugate() == a
