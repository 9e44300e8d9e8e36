"""Planar constructions: exact reflections and the four-point reduction chain,
rectangle-to-square tilings, the H_alpha quadrangle family (float), distance
chains and SVG export of labeled scenes."""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .configuration import CommensurableLine, Configuration, commensurability_check, rational_sqrt
from .errors import AmbiguityError, PositionError
from .exact import GaussRational

FormalSum = dict  # point -> coefficient, zero coefficients dropped


def _g(z) -> GaussRational:
    return GaussRational.coerce(z)


def _cross(a: GaussRational, b: GaussRational) -> Fraction:
    return a.re * b.im - a.im * b.re


def _dot(a: GaussRational, b: GaussRational) -> Fraction:
    return a.re * b.re + a.im * b.im


# ---------------------------------------------------------------------------
# exact reflections and formal relations


def reflect_about_line(p, a, b) -> GaussRational:
    """Mirror image of p in the line through a and b."""
    p, a, b = _g(p), _g(a), _g(b)
    if a == b:
        raise ValueError("a line needs two distinct points")
    d = b - a
    return a + d * ((p - a) / d).conjugate()


def formal_sum(terms) -> FormalSum:
    out: FormalSum = {}
    for point, coef in terms:
        point, coef = _g(point), _g(coef)
        out[point] = out.get(point, GaussRational(0)) + coef
    return {k: v for k, v in out.items() if not v.is_zero()}


def _combine(*pairs) -> FormalSum:
    """sum of coef * relation over (coef, relation) pairs."""
    return formal_sum((p, _g(c) * v) for c, rel in pairs for p, v in rel.items())


def _image(rel: FormalSum, sigma) -> FormalSum:
    return formal_sum((sigma(p), v) for p, v in rel.items())


def _formal_json(rel: FormalSum) -> list:
    return [{"point": p.to_strings(), "coefficient": v.to_strings()}
            for p, v in sorted(rel.items(), key=lambda kv: kv[0].key())]


@dataclass(frozen=True)
class ReductionStep:
    kind: str  # reflection | collinear_case | rectangle | tiling | square_relation
    data: Mapping
    relation: FormalSum = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        for k, v in self.data.items():
            out[k] = _jsonable(v)
        if self.relation:
            out["relation"] = _formal_json(self.relation)
        return out


def _jsonable(v):
    if isinstance(v, GaussRational):
        return v.to_strings()
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, CommensurableLine):
        return {"origin": v.origin.to_strings(), "step": v.step.to_strings(),
                "positions": list(v.positions)}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


@dataclass(frozen=True)
class ReductionChain:
    configuration: Configuration
    steps: tuple[ReductionStep, ...]

    def step(self, kind: str) -> ReductionStep | None:
        return next((s for s in self.steps if s.kind == kind), None)

    @property
    def collinear(self) -> bool:
        return self.step("collinear_case") is not None

    @property
    def rectangle(self) -> tuple[GaussRational, ...] | None:
        s = self.step("rectangle")
        return None if s is None else tuple(s.data["vertices"])

    def square_configuration(self) -> Configuration | None:
        """The tiled square as the alternating four-point configuration."""
        s = self.step("square_relation")
        if s is None:
            return None
        z = s.data["corners"]
        return Configuration(z, [1, -1, 1, -1])

    def verify(self) -> bool:
        return verify_reduction(self)

    def to_dict(self) -> dict:
        return {"steps": [s.to_dict() for s in self.steps]}


def _strictly_inside(p, a, b, c) -> bool:
    s1, s2, s3 = _cross(b - a, p - a), _cross(c - b, p - b), _cross(a - c, p - c)
    return (s1 > 0 and s2 > 0 and s3 > 0) or (s1 < 0 and s2 < 0 and s3 < 0)


def quadrangle_reduction(c: Configuration) -> ReductionChain:
    """Reflect across line(x1, x2), then across line(x3, x5), to reach an
    alternating rectangle relation, or stop at a collinear four-point relation."""
    if len(c.points) != 4:
        raise PositionError("four_points", "the reduction needs exactly four points")
    x1, x2, x3, x4 = c.points
    a1, a2, a3, a4 = c.weights
    pts = c.points
    for i in range(4):
        for j in range(i + 1, 4):
            for k in range(j + 1, 4):
                if _cross(pts[j] - pts[i], pts[k] - pts[i]) == 0:
                    raise PositionError("general_position",
                                        f"points {i + 1}, {j + 1}, {k + 1} are collinear")
    for idx in (0, 1):
        others = [p for t, p in enumerate(pts) if t != idx]
        if _strictly_inside(pts[idx], *others):
            raise PositionError("hull_vertex", f"x{idx + 1} is not a vertex of the convex hull")
    if c.weight_sum.is_zero():
        raise PositionError("weight_sum", "the weights sum to zero")
    if a4.is_zero():
        raise PositionError("alpha4_nonzero", "the fourth weight must be nonzero")

    eq18 = formal_sum(zip(pts, c.weights))
    sigma1 = lambda z: reflect_about_line(z, x1, x2)  # noqa: E731
    y1, x5 = sigma1(x4), sigma1(x3)
    eq7 = formal_sum([(x5, a3), (y1, a4), (x3, -a3), (x4, -a4)])
    steps = [ReductionStep("reflection", {"line": [x1, x2], "images": [x5, y1],
                                          "equation": "eq18 o sigma1 - eq18"}, eq7)]

    if _dot(x4 - x3, x2 - x1) == 0:
        line_pts = list(dict.fromkeys([x5, y1, x3, x4]))
        comm = commensurability_check(line_pts)
        steps.append(ReductionStep("collinear_case", {"points": line_pts, "line": comm}, eq7))
        return ReductionChain(c, tuple(steps))

    sigma2 = lambda z: reflect_about_line(z, x3, x5)  # noqa: E731
    y2, y3, y4 = sigma2(y1), sigma2(x4), x4
    steps.append(ReductionStep("reflection", {"line": [x3, x5], "images": [y2, y3]}))
    eq14 = formal_sum([(y1, 1), (y2, -1), (y3, 1), (y4, -1)])
    steps.append(ReductionStep("rectangle", {"vertices": [y1, y2, y3, y4]}, eq14))
    z, translations = tile_rectangle(y1, y2, y3, y4)
    steps.append(ReductionStep("tiling", {"translations": list(translations)}))
    steps.append(ReductionStep("square_relation", {"corners": list(z)},
                               formal_sum([(z[0], 1), (z[1], -1), (z[2], 1), (z[3], -1)])))
    return ReductionChain(c, tuple(steps))


def verify_reduction(chain: ReductionChain) -> bool:
    """Re-derive every relation of the chain from the previous one, exactly."""
    c = chain.configuration
    x1, x2, x3, x4 = c.points
    eq18 = formal_sum(zip(c.points, c.weights))
    sigma1 = lambda z: reflect_about_line(z, x1, x2)  # noqa: E731
    eq7 = _combine((1, _image(eq18, sigma1)), (-1, eq18))
    if eq7 != chain.steps[0].relation:
        return False
    if chain.collinear:
        s = chain.step("collinear_case")
        line = s.data["line"]
        return line is not None and all(p in {line.point(k) for k in line.positions}
                                        for p in s.data["points"])
    x5 = chain.steps[0].data["images"][0]
    sigma2 = lambda z: reflect_about_line(z, x3, x5)  # noqa: E731
    a4 = c.weights[3]
    eq14 = _combine((-1 / a4, _image(eq7, sigma2)), (1 / a4, eq7))
    rect = chain.step("rectangle")
    if eq14 != rect.relation:
        return False
    y1, y2, y3, y4 = rect.data["vertices"]
    if _dot(y1 - y2, y2 - y3) != 0 or (y1 - y2).norm2() != (y4 - y3).norm2():
        return False
    if _dot(x2 - x1, x5 - x3) != 0:
        return False
    total = formal_sum((p + t, v) for t in chain.step("tiling").data["translations"]
                       for p, v in eq14.items())
    return total == chain.step("square_relation").relation


# ---------------------------------------------------------------------------
# tilings


def _rational_ratio(a: GaussRational, b: GaussRational) -> Fraction:
    r = rational_sqrt(a.norm2() / b.norm2())
    if r is None:
        raise ValueError("rectangle sides are not commensurable")
    return r


def tile_rectangle(y1, y2, y3, y4) -> tuple[tuple[GaussRational, ...], tuple[GaussRational, ...]]:
    """Square corners z1..z4 and the translations of rectangle y1..y4 tiling it."""
    y1, y2, y3, y4 = map(_g, (y1, y2, y3, y4))
    a, b = y2 - y1, y4 - y1
    if y3 != y2 + b or _dot(a, b) != 0:
        raise ValueError("vertices do not form a rectangle in cyclic order")
    ratio = _rational_ratio(b, a)  # |b| / |a| = n / m
    n, m = ratio.numerator, ratio.denominator
    translations = tuple(a * i + b * j for j in range(m) for i in range(n))
    corners = (y1, y1 + a * n, y1 + a * n + b * m, y1 + b * m)
    return corners, translations


def tile_square_by_rectangle(p, q) -> tuple[Fraction, tuple[GaussRational, ...]]:
    """Smallest square side s with s/p, s/q integral and the tile offsets of
    the axis-parallel p x q rectangle."""
    p, q = Fraction(p), Fraction(q)
    if p <= 0 or q <= 0:
        raise ValueError("side lengths must be positive")
    s = Fraction(math.lcm(p.numerator, q.numerator), math.gcd(p.denominator, q.denominator))
    nx, ny = int(s / p), int(s / q)
    translations = tuple(GaussRational(p * i, q * j) for j in range(ny) for i in range(nx))
    return s, translations


def telescoped_relation(p, q, translations) -> FormalSum:
    """Sum of the alternating rectangle relation over the given offsets."""
    p, q = Fraction(p), Fraction(q)
    rect = formal_sum([(0, 1), (GaussRational(p), -1), (GaussRational(p, q), 1), (GaussRational(0, q), -1)])
    return formal_sum((pt + t, v) for t in translations for pt, v in rect.items())


# ---------------------------------------------------------------------------
# scenes


@dataclass
class ConstructionScene:
    labeled_points: dict
    segments: list = field(default_factory=list)
    mode: str = "exact"
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in ("exact", "float"):
            raise ValueError("mode must be 'exact' or 'float'")
        for a, b, _style in self.segments:
            if a not in self.labeled_points or b not in self.labeled_points:
                raise ValueError(f"segment {a}-{b} references an unknown label")
        if self.mode == "exact" and not all(isinstance(p, GaussRational) for p in self.labeled_points.values()):
            raise ValueError("exact scenes hold GaussRational points only")

    def coords(self, label: str) -> complex:
        p = self.labeled_points[label]
        return complex(p) if isinstance(p, GaussRational) else complex(p[0], p[1])

    def to_dict(self) -> dict:
        pts = {}
        for label, p in self.labeled_points.items():
            if isinstance(p, GaussRational):
                pts[label] = p.to_strings()
            else:
                pts[label] = [float(p[0]), float(p[1])]
        out = {"mode": self.mode, "points": pts,
               "segments": [[a, b, s] for a, b, s in self.segments]}
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out


# ---------------------------------------------------------------------------
# the H_alpha family


def _reflect_x0(z: complex) -> complex:
    return complex(-z.real, z.imag)


def _isometry_from(src: Sequence[complex], dst: Sequence[complex], tol: float):
    """The plane isometry mapping three non-collinear src points to dst."""
    s0, s1, s2 = src
    d0, d1, d2 = dst
    for conj in (False, True):
        f = (lambda z: z.conjugate()) if conj else (lambda z: z)
        u = (d1 - d0) / (f(s1) - f(s0))
        a = d0 - u * f(s0)
        if abs(abs(u) - 1) <= tol and abs(a + u * f(s2) - d2) <= tol:
            return lambda z, a=a, u=u, f=f: a + u * f(z)
    return None


def h_alpha_admissible(A, B, C, alpha: float) -> bool:
    """Whether construct_h_alpha accepts these inputs."""
    try:
        construct_h_alpha(A, B, C, alpha)
    except (PositionError, AmbiguityError):
        return False
    return True


def construct_h_alpha(A, B, C, alpha: float) -> ConstructionScene:
    """Build D_alpha from triangle ABC and the angle alpha (degrees), plus the
    mirror points C', D' and H' used by the distance argument."""
    A, B, C = (complex(*z) if isinstance(z, (tuple, list)) else complex(z) for z in (A, B, C))
    if not 0 < alpha < 45:
        raise PositionError("alpha_range", "alpha must lie strictly between 0 and 45 degrees")
    if abs(B - A) == 0:
        raise PositionError("degenerate_triangle", "A and B coincide")
    h = abs(B - A) / 2
    mid = (A + B) / 2
    rot = (B - A) / abs(B - A)
    to_local = lambda z: (z - mid) / rot  # noqa: E731
    to_world = lambda z: z * rot + mid  # noqa: E731
    c = to_local(C)
    scale = max(1.0, abs(c), h)
    if abs(c.imag) <= 1e-12 * scale:
        raise PositionError("degenerate_triangle", "C lies on line AB")
    if abs(c.real) <= 1e-12 * scale:
        raise PositionError("bisector", "C lies on the perpendicular bisector of AB")
    if c.real < 0:
        raise PositionError("same_side", "C and B lie on opposite sides of the bisector")
    t = math.tan(math.radians(alpha))
    warnings = []
    if 1 / t > 1e6:
        warnings.append("ill_conditioned_alpha")

    p_cands = [c.real + s * abs(c.imag) / t for s in (1, -1)]
    p_valid = [p for p in p_cands if p > h]
    if not p_valid:
        raise AmbiguityError("no point P beyond B meets line PC at the angle alpha")
    p = complex(min(p_valid, key=lambda x: abs(x - h)), 0)

    d = c - p
    chosen = None
    for s in (1, -1):
        e = complex(0, c.imag + s * c.real / t)
        g = p + d * ((e - p) * d.conjugate()).real / abs(d) ** 2
        eg, ec_mirror = g - e, _reflect_x0(c) - e
        if abs(eg) > 0 and abs((eg.conjugate() * ec_mirror).imag) <= 1e-9 * abs(eg) * abs(ec_mirror) \
                and (eg.conjugate() * ec_mirror).real > 0:
            chosen = (e, g)
            break
    if chosen is None:
        raise AmbiguityError("no point E on the bisector makes it bisect angle GEC")
    e, g = chosen
    dl = 2 * g - c
    c2, d2 = _reflect_x0(c), _reflect_x0(dl)
    phi = _isometry_from((c, c2, d2), (c2, dl, c), 1e-7 * scale)
    if phi is None:
        raise AmbiguityError("the trapezium CC'DD' admits no second placement")
    h2 = phi(dl)
    local = {"A": complex(-h, 0), "B": complex(h, 0), "C": c, "P": p, "E": e, "G": g,
             "D": dl, "C'": c2, "D'": d2, "H'": h2, "M": 0j}
    pts = {k: (to_world(z).real, to_world(z).imag) for k, z in local.items()}
    segments = [("A", "B", "base"), ("B", "C", "triangle"), ("C", "A", "triangle"),
                ("B", "P", "construction"), ("P", "C", "construction"), ("C", "E", "construction"),
                ("E", "G", "construction"), ("G", "D", "construction"), ("M", "E", "bisector"),
                ("C", "C'", "trapezium"), ("C'", "D", "trapezium"), ("D", "D'", "trapezium"),
                ("D'", "C", "trapezium"), ("D'", "H'", "key")]
    scene = ConstructionScene(pts, segments, "float", warnings)
    return scene


@dataclass(frozen=True)
class HAlphaReport:
    checks: dict
    warnings: tuple[str, ...]
    r: float

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {"checks": dict(self.checks), "passed": self.passed, "r": self.r,
                "warnings": list(self.warnings)}


def verify_h_alpha(scene: ConstructionScene, tol: float = 1e-9) -> HAlphaReport:
    """Five float checks, on coordinates rescaled so that |AB| = 4."""
    A, B = scene.coords("A"), scene.coords("B")
    k = 4 / abs(B - A)
    mid, rot = (A + B) / 2, (B - A) / abs(B - A)
    z = {lab: (scene.coords(lab) - mid) / rot * k for lab in scene.labeled_points}
    C, D, E, G = z["C"], z["D"], z["E"], z["G"]
    C2, D2, H2 = z["C'"], z["D'"], z["H'"]
    checks = {}
    checks["midpoint"] = abs(G - (C + D) / 2) <= tol
    eg, ec = G - E, C - G
    checks["right_angle"] = abs(eg.real * ec.real + eg.imag * ec.imag) <= tol * max(1.0, abs(eg) * abs(ec))
    u, w = G - E, _reflect_x0(C) - E  # bisector x = 0 through E
    checks["bisector"] = abs(E.real) <= tol and abs((u.conjugate() * w).imag) <= tol * max(1.0, abs(u) * abs(w))
    l1, l2, l3 = abs(C - D2), abs(C2 - C), abs(D - C2)
    checks["trapezium"] = abs(l1 - l2) <= tol and abs(l2 - l3) <= tol
    phi = _isometry_from((C, C2, D2), (C2, D, C), tol * 10)
    r = abs(D2 - H2)
    checks["second_placement"] = phi is not None and abs(phi(D) - H2) <= tol and r > tol
    warnings = list(scene.warnings)
    ang = math.atan2(abs(C.imag), abs(z["P"].real - C.real)) if "P" in z else 1.0
    if ang < 1e-6 and "ill_conditioned_alpha" not in warnings:
        warnings.append("ill_conditioned_alpha")
    return HAlphaReport(checks, tuple(warnings), r / k)


# ---------------------------------------------------------------------------
# distance chains


def distance_chain(a, b, r: float) -> list[complex]:
    """Points from a to b with consecutive distances exactly r (in floats)."""
    a = complex(*a) if isinstance(a, (tuple, list)) else complex(a)
    b = complex(*b) if isinstance(b, (tuple, list)) else complex(b)
    if r <= 0:
        raise ValueError("r must be positive")
    d = abs(b - a)
    if d == 0:
        return [a]
    unit = (b - a) / d
    k = max(0, math.ceil(d / r) - 2)
    chain = [a + unit * (r * j) for j in range(k + 1)]
    start = chain[-1]
    rem = abs(b - start)
    half = rem / 2
    height = math.sqrt(max(r * r - half * half, 0.0))
    chain.append(start + unit * half + unit * 1j * height)
    chain.append(b)
    return chain


# ---------------------------------------------------------------------------
# SVG


def _fmt(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


_STYLE = {
    "base": 'stroke="#000" stroke-width="1.5"',
    "triangle": 'stroke="#000"',
    "construction": 'stroke="#777" stroke-dasharray="4 3"',
    "bisector": 'stroke="#36c" stroke-dasharray="2 2"',
    "trapezium": 'stroke="#c33"',
    "key": 'stroke="#090" stroke-width="1.5"',
}


def scene_svg(scene: ConstructionScene, size: int = 480, margin: int = 30) -> str:
    pts = {lab: scene.coords(lab) for lab in scene.labeled_points}
    head = '<?xml version="1.0" encoding="UTF-8"?>\n'
    if not pts:
        return head + (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                       f'width="{size}" height="{size}" viewBox="0 0 {size} {size}"></svg>\n')
    xs = [z.real for z in pts.values()]
    ys = [z.imag for z in pts.values()]
    span = max(max(xs) - min(xs), max(ys) - min(ys)) or 1.0
    k = (size - 2 * margin) / span

    def xy(z: complex) -> tuple[str, str]:
        return _fmt(margin + (z.real - min(xs)) * k), _fmt(size - margin - (z.imag - min(ys)) * k)

    lines = [head + f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" '
             f'height="{size}" viewBox="0 0 {size} {size}">',
             '<rect width="100%" height="100%" fill="#fff"/>']
    for a, b, style in scene.segments:
        (x1, y1), (x2, y2) = xy(pts[a]), xy(pts[b])
        lines.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
                     f'{_STYLE.get(style, _STYLE["triangle"])} fill="none"/>')
    for lab, z in pts.items():
        x, y = xy(z)
        lines.append(f'<circle cx="{x}" cy="{y}" r="2.5" fill="#000"/>')
        text = lab.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        lines.append(f'<text x="{x}" y="{y}" dx="4" dy="-4" font-family="sans-serif" '
                     f'font-size="12">{text}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def svg_export(scene: ConstructionScene, path: str | os.PathLike) -> None:
    atomic_write(path, scene_svg(scene))


def exact_scene(points: Mapping[str, object], segments=()) -> ConstructionScene:
    return ConstructionScene({k: _g(v) for k, v in points.items()}, list(segments), "exact")


def reduction_scene(chain: ReductionChain) -> ConstructionScene:
    """Exact scene of the input points and the derived rectangle."""
    pts = {f"x{i + 1}": p for i, p in enumerate(chain.configuration.points)}
    segs = [("x1", "x2", "base")]
    x5, y1 = chain.steps[0].data["images"]
    pts.setdefault("x5", x5)
    pts.setdefault("y1", y1)
    rect = chain.rectangle
    if rect is not None:
        for i, y in enumerate(rect):
            pts[f"y{i + 1}"] = y
        segs += [(f"y{i + 1}", f"y{(i + 1) % 4 + 1}", "trapezium") for i in range(4)]
        segs.append(("x3", "x5", "bisector"))
    return ConstructionScene(pts, segs, "exact")
