"""Point configurations, motion groups, placements and finite lattice windows."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Iterator, Sequence

from .errors import DenominatorOverflow
from .exact import ONE, GaussRational, as_fraction, pythagorean_unit

KINDS = (
    "translations",
    "rigid",
    "isometries",
    "line-isometries",
    "direct-similarities",
    "order-preserving-line-similarities",
)

QUARTER_TURNS = (GaussRational(1), GaussRational(0, 1), GaussRational(-1), GaussRational(0, -1))


def _gauss_tuple(points) -> tuple[GaussRational, ...]:
    return tuple(GaussRational.coerce(p) for p in points)


@dataclass(frozen=True)
class Configuration:
    """Weighted tuple of distinct plane points. Weights default to 1."""

    points: tuple[GaussRational, ...]
    weights: tuple[GaussRational, ...] = ()

    def __post_init__(self):
        pts = _gauss_tuple(self.points)
        ws = _gauss_tuple(self.weights) if self.weights else tuple(ONE for _ in pts)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", ws)
        if len(set(pts)) != len(pts):
            raise ValueError("configuration points must be pairwise distinct")
        if len(ws) != len(pts):
            raise ValueError("weights and points differ in length")

    @property
    def weight_sum(self) -> GaussRational:
        return sum(self.weights, GaussRational(0))

    @property
    def weight_sum_nonzero(self) -> bool:
        return not self.weight_sum.is_zero()

    def __len__(self):
        return len(self.points)

    def is_real(self) -> bool:
        return all(p.is_real() for p in self.points)


@dataclass(frozen=True)
class MotionGroup:
    kind: str = "translations"
    rotation_units: tuple[GaussRational, ...] = ()
    scale_set: tuple[Fraction, ...] = ()
    quarter_turns: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown motion group kind {self.kind!r}")
        units = _gauss_tuple(self.rotation_units)
        for u in units:
            if u.norm2() != 1:
                raise ValueError(f"rotation unit {u} is not of modulus 1")
        scales = tuple(as_fraction(s) for s in self.scale_set)
        if any(s <= 0 for s in scales):
            raise ValueError("scales must be positive")
        object.__setattr__(self, "rotation_units", units)
        object.__setattr__(self, "scale_set", scales)

    def rotations(self) -> list[GaussRational]:
        units = list(self.rotation_units) or [ONE]
        if self.quarter_turns:
            units = [u * q for u in units for q in QUARTER_TURNS]
        out: list[GaussRational] = []
        for u in units:
            if u not in out:
                out.append(u)
        return out

    def variants(self) -> list[tuple[GaussRational, Fraction, bool]]:
        """``(rotation, scale, reflect)`` triples in enumeration order."""
        one = Fraction(1)
        scales = list(self.scale_set) or [one]
        if self.kind == "translations":
            return [(ONE, one, False)]
        if self.kind == "rigid":
            return [(u, one, False) for u in self.rotations()]
        if self.kind == "isometries":
            rots = self.rotations()
            return [(u, one, False) for u in rots] + [(u, one, True) for u in rots]
        if self.kind == "line-isometries":
            return [(ONE, one, False), (GaussRational(-1), one, False)]
        if self.kind == "direct-similarities":
            return [(u, s, False) for u in self.rotations() for s in scales]
        return [(ONE, s, False) for s in scales]

    @property
    def allows_reflections(self) -> bool:
        return self.kind == "isometries"


@dataclass(frozen=True)
class Placement:
    """The map ``x -> shift + rotation * scale * tau(x)``; tau conjugates when
    ``reflect`` is set."""

    rotation: GaussRational = ONE
    scale: Fraction = Fraction(1)
    shift: GaussRational = GaussRational(0)
    reflect: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rotation", GaussRational.coerce(self.rotation))
        object.__setattr__(self, "shift", GaussRational.coerce(self.shift))
        object.__setattr__(self, "scale", as_fraction(self.scale))
        if self.rotation.norm2() != 1:
            raise ValueError("placement rotation must be a unit")
        if self.scale <= 0:
            raise ValueError("placement scale must be positive")

    def __call__(self, z: GaussRational) -> GaussRational:
        if self.reflect:
            z = z.conjugate()
        return self.shift + self.rotation * self.scale * z

    @property
    def multiplier(self) -> GaussRational:
        return self.rotation * self.scale


def apply_placement(pl: Placement, c: Configuration) -> list[GaussRational]:
    return [pl(p) for p in c.points]


@dataclass(frozen=True)
class Window:
    """Lattice points ``(p/d, q/d)`` with p, q in inclusive integer ranges."""

    denominator: int = 1
    x_range: tuple[int, int] = (0, 0)
    y_range: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.denominator <= 0:
            raise ValueError("window denominator must be positive")
        object.__setattr__(self, "x_range", tuple(int(v) for v in self.x_range))
        object.__setattr__(self, "y_range", tuple(int(v) for v in self.y_range))
        if self.x_range[0] > self.x_range[1] or self.y_range[0] > self.y_range[1]:
            raise ValueError("window is empty")

    @property
    def width(self) -> int:
        return self.x_range[1] - self.x_range[0] + 1

    @property
    def height(self) -> int:
        return self.y_range[1] - self.y_range[0] + 1

    def __len__(self):
        return self.width * self.height

    def lattice_coords(self, z: GaussRational) -> tuple[int, int] | None:
        """Integer numerators ``(p, q)`` of z, or None when z is off-lattice."""
        p, q = z.re * self.denominator, z.im * self.denominator
        if p.denominator != 1 or q.denominator != 1:
            return None
        return int(p), int(q)

    def index(self, z: GaussRational) -> int | None:
        pq = self.lattice_coords(z)
        if pq is None:
            return None
        p, q = pq
        if not (self.x_range[0] <= p <= self.x_range[1] and self.y_range[0] <= q <= self.y_range[1]):
            return None
        return (q - self.y_range[0]) * self.width + (p - self.x_range[0])

    def point(self, index: int) -> GaussRational:
        q, p = divmod(index, self.width)
        d = self.denominator
        return GaussRational(Fraction(p + self.x_range[0], d), Fraction(q + self.y_range[0], d))

    def points(self) -> Iterator[GaussRational]:
        """Row-major: y outer, x inner."""
        for k in range(len(self)):
            yield self.point(k)

    def __contains__(self, z) -> bool:
        return self.index(GaussRational.coerce(z)) is not None


@dataclass(frozen=True)
class GroupedPlacement:
    """A placement tagged with the index of its (rotation, scale, reflect) variant."""

    placement: Placement
    variant: int


def enumerate_grouped(c: Configuration, g: MotionGroup, w: Window) -> list[GroupedPlacement]:
    out: list[GroupedPlacement] = []
    if not c.points:
        return out
    d = w.denominator
    for vi, (rot, scale, reflect) in enumerate(g.variants()):
        base = Placement(rot, scale, GaussRational(0), reflect)
        offsets = [base(p) for p in c.points]
        rel = []
        for o in offsets:
            delta = o - offsets[0]
            pq = (delta.re * d, delta.im * d)
            if pq[0].denominator != 1 or pq[1].denominator != 1:
                raise DenominatorOverflow(
                    f"image offset {delta} is not representable at denominator {d}")
            rel.append((int(pq[0]), int(pq[1])))
        (x0, x1), (y0, y1) = w.x_range, w.y_range
        # anchor range keeping every image inside the window
        lo_x = x0 - min(dx for dx, _ in rel)
        hi_x = x1 - max(dx for dx, _ in rel)
        lo_y = y0 - min(dy for _, dy in rel)
        hi_y = y1 - max(dy for _, dy in rel)
        for q in range(lo_y, hi_y + 1):
            for p in range(lo_x, hi_x + 1):
                anchor = GaussRational(Fraction(p, d), Fraction(q, d))
                shift = anchor - offsets[0]
                out.append(GroupedPlacement(Placement(rot, scale, shift, reflect), vi))
    return out


def enumerate_placements(c: Configuration, g: MotionGroup, w: Window) -> list[Placement]:
    """All placements of ``c`` from ``g`` whose full image lies in ``w``.

    Ordered by group variant, then by the first image point in row-major
    window order.
    """
    return [gp.placement for gp in enumerate_grouped(c, g, w)]


def rational_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _candidate_maps(c: Configuration, g: MotionGroup):
    pts = c.points
    seen = set()
    order = 0
    for i, j in permutations(range(len(pts)), 2):
        src = pts[j] - pts[i]
        for k, l in permutations(range(len(pts)), 2):
            dst = pts[l] - pts[k]
            for reflect in (False, True):
                if reflect and not g.allows_reflections:
                    continue
                s = src.conjugate() if reflect else src
                w = dst / s
                if g.kind in ("translations", "rigid", "isometries", "line-isometries"):
                    if w.norm2() != 1:
                        continue
                    rot, scale = w, Fraction(1)
                else:
                    scale = rational_sqrt(w.norm2())
                    if scale is None:
                        continue
                    rot = w / scale
                if g.kind == "translations" and w != ONE:
                    continue
                if g.kind in ("line-isometries", "order-preserving-line-similarities") and not w.is_real():
                    continue
                if g.kind == "order-preserving-line-similarities" and w.re <= 0:
                    continue
                p = pts[i].conjugate() if reflect else pts[i]
                shift = pts[k] - w * p
                key = (rot, scale, shift, reflect)
                if key in seen:
                    continue
                seen.add(key)
                klass = 2 if reflect else (0 if w == ONE else 1)
                yield (klass, -src.norm2(), order), Placement(rot, scale, shift, reflect)
                order += 1


def overlap_isometry_search(c: Configuration, g: MotionGroup) -> Placement | None:
    """Find a map from the pair-alignment candidates with ``|E & s(E)| = |E| - 1``.

    Candidates are tried translations first, then other direct maps, then
    reflections; within a class, alignments of longer pairs come first.
    """
    pts = set(c.points)
    target = len(pts) - 1
    cands = sorted(_candidate_maps(c, g), key=lambda kv: kv[0])
    for _, pl in cands:
        image = set(apply_placement(pl, c))
        if len(image & pts) == target:
            return pl
    return None


@dataclass(frozen=True)
class CommensurableLine:
    origin: GaussRational
    step: GaussRational
    positions: tuple[int, ...]

    @property
    def direction(self) -> GaussRational:
        """``step`` divided by its positive rational content."""
        re, im = self.step.re, self.step.im
        den = math.lcm(re.denominator, im.denominator)
        content = Fraction(math.gcd(int(re * den), int(im * den)), den)
        return self.step / content

    def point(self, k: int) -> GaussRational:
        return self.origin + self.step * k


def commensurability_check(points: Sequence) -> CommensurableLine | None:
    """Rescale collinear, commensurable points to integers ``origin + step*k``
    with smallest position 0 and gap gcd 1; None when not collinear."""
    pts = _gauss_tuple(points)
    if len(set(pts)) != len(pts):
        raise ValueError("points must be pairwise distinct")
    if not pts:
        return None
    if len(pts) == 1:
        return CommensurableLine(pts[0], ONE, (0,))
    v = pts[1] - pts[0]
    ts = []
    for p in pts:
        t = (p - pts[0]) / v
        if not t.is_real():
            return None
        ts.append(t.re)
    tmin = min(ts)
    rel = [t - tmin for t in ts]
    den = math.lcm(*(r.denominator for r in rel))
    nums = [int(r * den) for r in rel]
    g = math.gcd(*nums)
    unit = Fraction(g, den)
    return CommensurableLine(pts[0] + v * tmin, v * unit, tuple(n // g for n in nums))


def pythagorean_units(limit: int) -> list[GaussRational]:
    """Distinct exact units from ``pythagorean_unit(m, n)`` with |m|, |n| <= limit."""
    out: list[GaussRational] = []
    for m in range(-limit, limit + 1):
        for n in range(-limit, limit + 1):
            if m or n:
                u = pythagorean_unit(m, n)
                if u not in out:
                    out.append(u)
    return out
