import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from pompeiu.configuration import Configuration
from pompeiu.errors import PositionError
from pompeiu.exact import GaussRational
from pompeiu.geometry import (ConstructionScene, construct_h_alpha, distance_chain, exact_scene,
                              formal_sum, quadrangle_reduction, reduction_scene,
                              reflect_about_line, scene_svg, svg_export, telescoped_relation,
                              tile_rectangle, tile_square_by_rectangle, verify_h_alpha)
from pompeiu.spectral import branch_factorization

G = GaussRational
gauss = st.builds(G, st.fractions(-5, 5, max_denominator=6), st.fractions(-5, 5, max_denominator=6))


def test_reflection_examples():
    assert reflect_about_line(G(1, 1), 0, 1) == G(1, -1)
    assert reflect_about_line(G(5, 0), 0, 1) == G(5, 0)
    assert reflect_about_line(G(3, -1), 1, G(1, 1)) == G(-1, -1)
    with pytest.raises(ValueError):
        reflect_about_line(G(1), G(2), G(2))


@given(gauss, gauss, gauss)
@settings(max_examples=80, deadline=None)
def test_reflection_is_an_involution_fixing_the_line(p, a, b):
    assume(a != b)
    assert reflect_about_line(reflect_about_line(p, a, b), a, b) == p
    t = Fraction(2, 7)
    on_line = a + (b - a) * t
    assert reflect_about_line(on_line, a, b) == on_line


def test_worked_reduction():
    chain = quadrangle_reduction(Configuration([0, 2, G(1, 2), G(3, 1)], [1, 1, 1, 2]))
    x5, y1 = chain.steps[0].data["images"]
    assert (x5, y1) == (G(1, -2), G(3, -1))
    assert chain.rectangle == (G(3, -1), G(-1, -1), G(-1, 1), G(3, 1))
    assert chain.verify()
    square = chain.square_configuration()
    fac = branch_factorization(square)
    assert fac.kind == "alternating"


def test_collinear_reduction():
    chain = quadrangle_reduction(Configuration([0, 2, G(1, 2), G(1, 1)]))
    assert chain.collinear
    line = chain.step("collinear_case").data["line"]
    assert sorted(line.positions) == [0, 1, 3, 4]
    assert chain.verify()


def test_reduction_preconditions():
    with pytest.raises(PositionError) as err:
        quadrangle_reduction(Configuration([0, 1, 2, G(1, 2)]))
    assert err.value.which == "general_position"
    with pytest.raises(PositionError) as err:
        quadrangle_reduction(Configuration([G(1, 1), 0, 4, G(0, 4)]))
    assert err.value.which == "hull_vertex"
    with pytest.raises(PositionError) as err:
        quadrangle_reduction(Configuration([0, 2, G(1, 2), G(3, 1)], [1, 1, -1, -1]))
    assert err.value.which == "weight_sum"
    with pytest.raises(PositionError) as err:
        quadrangle_reduction(Configuration([0, 2, G(1, 2), G(3, 1)], [1, 1, 1, 0]))
    assert err.value.which == "alpha4_nonzero"


@given(st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=4, max_size=4, unique=True),
       st.lists(st.integers(1, 4), min_size=4, max_size=4))
@settings(max_examples=80, deadline=None)
def test_reduction_chain_verifies(points, ws):
    c = Configuration([G(a, b) for a, b in points], ws)
    try:
        chain = quadrangle_reduction(c)
    except PositionError:
        return
    assert chain.verify()
    if not chain.collinear:
        y1, y2, y3, y4 = chain.rectangle
        d = y1 - y2
        e = y2 - y3
        assert d.re * e.re + d.im * e.im == 0
        assert (y1 - y2).norm2() == (y4 - y3).norm2()
        rel = chain.step("square_relation").relation
        assert sorted(v.re for v in rel.values()) == [-1, -1, 1, 1]


def test_square_tilings():
    assert tile_square_by_rectangle(4, 2) == (4, (G(0), G(0, 2)))
    assert tile_square_by_rectangle(1, 1) == (1, (G(0),))
    s, t = tile_square_by_rectangle(Fraction(3, 2), 1)
    assert s == 3 and len(t) == 6
    assert telescoped_relation(Fraction(3, 2), 1, t) == formal_sum(
        [(0, 1), (G(3), -1), (G(3, 3), 1), (G(0, 3), -1)])


@given(st.fractions(Fraction(1, 4), 5, max_denominator=5), st.fractions(Fraction(1, 4), 5, max_denominator=5))
@settings(max_examples=60, deadline=None)
def test_telescoping_leaves_four_corners(p, q):
    s, t = tile_square_by_rectangle(p, q)
    assert (s / p).denominator == 1 and (s / q).denominator == 1
    assert math.gcd(int(s / p), int(s / q)) == 1  # minimal common multiple
    rel = telescoped_relation(p, q, t)
    assert rel == formal_sum([(0, 1), (G(s), -1), (G(s, s), 1), (G(0, s), -1)])


def test_rotated_rectangle_tiling():
    a, b = G(3, 4), G(-8, 6)  # |a| = 5, |b| = 10
    corners, shifts = tile_rectangle(0, a, a + b, b)
    assert len(shifts) == 2
    assert (corners[1] - corners[0]).norm2() == (corners[3] - corners[0]).norm2()


def test_h_alpha_worked_example():
    scene = construct_h_alpha((0, 0), (4, 0), (3, 2), 23)
    rep = verify_h_alpha(scene, 1e-9)
    assert rep.passed and rep.r > 0 and not rep.warnings


def test_h_alpha_preconditions():
    with pytest.raises(PositionError):
        construct_h_alpha((0, 0), (4, 0), (2, 3), 23)
    with pytest.raises(PositionError):
        construct_h_alpha((0, 0), (4, 0), (3, 2), 45)
    with pytest.raises(PositionError):
        construct_h_alpha((0, 0), (4, 0), (1, 2), 23)
    with pytest.raises(PositionError):
        construct_h_alpha((0, 0), (4, 0), (3, 0), 23)


def test_h_alpha_planted_defect():
    scene = construct_h_alpha((0, 0), (4, 0), (3, 2), 23)
    x, y = scene.labeled_points["D"]
    scene.labeled_points["D"] = (x + 1e-3, y)
    rep = verify_h_alpha(scene, 1e-9)
    assert not rep.checks["midpoint"]


def test_h_alpha_conditioning_warning():
    rep = verify_h_alpha(construct_h_alpha((0, 0), (4, 0), (3, 2), 1e-8))
    assert "ill_conditioned_alpha" in rep.warnings


def test_h_alpha_general_position_of_ab():
    scene = construct_h_alpha((1, 1), (1 + 3, 1 + 4), (1 + 3 * 0.9 - 4 * 0.5, 1 + 4 * 0.9 + 3 * 0.5), 17)
    assert verify_h_alpha(scene).passed


def test_distance_chains():
    chain = distance_chain((0, 0), (1, 0), 1)
    assert chain[0] == 0 and chain[-1] == 1
    assert abs(chain[1] - complex(0.5, math.sqrt(3) / 2)) < 1e-15
    assert distance_chain((2, 3), (2, 3), 1) == [complex(2, 3)]
    chain = distance_chain((0, 0), (10, 0), 1)
    assert len(chain) <= 22


@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
       st.floats(0.1, 10))
@settings(max_examples=100, deadline=None)
def test_distance_chain_steps(a, b, r):
    chain = distance_chain(a, b, r)
    assert chain[0] == a and chain[-1] == b
    for p, q in zip(chain, chain[1:]):
        assert abs(abs(q - p) - r) <= 1e-12 * max(1.0, r, abs(a), abs(b))
    assert len(chain) - 1 <= 2 * math.ceil(abs(b - a) / r) + 2


def test_svg_outputs(tmp_path):
    empty = ConstructionScene({}, [], "exact")
    svg_export(empty, tmp_path / "empty.svg")
    text = (tmp_path / "empty.svg").read_text()
    assert text.startswith("<?xml") and "<svg" in text and "<text" not in text
    scene = construct_h_alpha((0, 0), (4, 0), (3, 2), 23)
    svg = scene_svg(scene)
    assert svg.count("<text") == len(scene.labeled_points)
    svg_export(scene, tmp_path / "a.svg")
    svg_export(scene, tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_scene_invariants():
    with pytest.raises(ValueError):
        ConstructionScene({"A": G(0)}, [("A", "B", "base")], "exact")
    with pytest.raises(ValueError):
        ConstructionScene({"A": (0.0, 1.0)}, [], "exact")
    scene = exact_scene({"A": G(Fraction(1, 2), 0)})
    assert scene.to_dict()["points"] == {"A": ["1/2", "0"]}
    chain = quadrangle_reduction(Configuration([0, 2, G(1, 2), G(3, 1)], [1, 1, 1, 2]))
    assert "y3" in reduction_scene(chain).labeled_points
