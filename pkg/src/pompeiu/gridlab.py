"""Finite-window placement constraint systems and their exact kernels.

A :class:`ConstraintSystem` has one sparse row per placement: the functional
``f -> sum_i alpha_i f(phi(x_i))`` restricted to the window points. Its kernel
is the finite-window variety.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable, Mapping, Sequence

from .configuration import (
    Configuration,
    MotionGroup,
    Placement,
    Window,
    apply_placement,
    enumerate_grouped,
)
from .errors import InsufficientWindow
from .exact import ONE, GaussRational

Row = tuple[tuple[int, GaussRational], ...]


@dataclass(frozen=True)
class ConstraintSystem:
    window: Window
    placements: tuple[Placement, ...]
    rows: tuple[Row, ...]
    variants: tuple[int, ...] = ()
    n_variants: int = 1
    configuration: Configuration | None = None

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.window)

    def dense(self) -> list[list[GaussRational]]:
        zero = GaussRational(0)
        out = []
        for row in self.rows:
            dense = [zero] * self.n_cols
            for col, val in row:
                dense[col] = val
            out.append(dense)
        return out

    def apply(self, vector: Sequence) -> list:
        """Row-by-row evaluation ``A @ v``; exact for exact vectors."""
        out = []
        for row in self.rows:
            acc = 0
            for col, val in row:
                x = vector[col]
                acc = acc + (complex(val) * x if isinstance(x, complex) else val * x)
            out.append(acc)
        return out

    def relative_residual(self, vector: Sequence[complex]) -> float:
        """max |row . v| / (max |v| * max row l1-norm), in floating point."""
        vec = [complex(x) for x in vector]
        scale = max((abs(x) for x in vec), default=0.0)
        if scale == 0:
            return 0.0
        worst, rownorm = 0.0, 1.0
        for row in self.rows:
            acc = sum(complex(val) * vec[col] for col, val in row)
            worst = max(worst, abs(acc))
            rownorm = max(rownorm, sum(abs(complex(val)) for _, val in row))
        return worst / (scale * rownorm)


def _row_from_images(images: Iterable[GaussRational], weights: Iterable[GaussRational],
                     w: Window) -> Row:
    acc: dict[int, GaussRational] = {}
    for z, a in zip(images, weights):
        col = w.index(z)
        if col is None:
            raise ValueError(f"image point {z} lies outside the window")
        acc[col] = acc.get(col, GaussRational(0)) + a
    return tuple((col, val) for col, val in sorted(acc.items()) if not val.is_zero())


def assemble_constraints(c: Configuration, g: MotionGroup, w: Window) -> ConstraintSystem:
    """One row per enumerated placement, weights at the image columns."""
    grouped = enumerate_grouped(c, g, w)
    rows = tuple(_row_from_images(apply_placement(gp.placement, c), c.weights, w) for gp in grouped)
    return ConstraintSystem(
        window=w,
        placements=tuple(gp.placement for gp in grouped),
        rows=rows,
        variants=tuple(gp.variant for gp in grouped),
        n_variants=len(g.variants()),
        configuration=c,
    )


def assemble_from_placements(c: Configuration, placements: Sequence[Placement],
                             w: Window) -> ConstraintSystem:
    """System for an explicit placement list; every image must lie in ``w``."""
    rows = tuple(_row_from_images(apply_placement(pl, c), c.weights, w) for pl in placements)
    return ConstraintSystem(w, tuple(placements), rows, tuple(0 for _ in rows), 1, c)


def system_from_rows(w: Window, rows: Sequence[Mapping]) -> ConstraintSystem:
    """System from explicit functionals ``{point: coefficient}``."""
    built = []
    for r in rows:
        pts = [GaussRational.coerce(p) for p in r]
        built.append(_row_from_images(pts, [GaussRational.coerce(v) for v in r.values()], w))
    return ConstraintSystem(w, (), tuple(built), tuple(0 for _ in built), 1, None)


# ---------------------------------------------------------------------------
# sparse elimination over Q(i)
#
# Rows are dicts col -> (re, im) with rational parts.  Pivot rows are scaled so
# the pivot entry is 1, which keeps entry sizes bounded by the true RREF sizes
# (fraction-free updates blow up on the banded systems produced here).

try:  # gmpy2 rationals are several times faster than Fraction
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction


def _to_q(v: GaussRational) -> tuple:
    return (_Q(v.re.numerator, v.re.denominator), _Q(v.im.numerator, v.im.denominator))


def _from_q(a) -> GaussRational:
    re, im = a
    return GaussRational(Fraction(int(re.numerator), int(re.denominator)),
                         Fraction(int(im.numerator), int(im.denominator)))


def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _ginv(a):
    n = a[0] * a[0] + a[1] * a[1]
    return (a[0] / n, -a[1] / n)


def _axpy(row: dict, t, prow: dict) -> None:
    """row -= t * prow, in place."""
    for k, v in prow.items():
        re, im = _gmul(t, v)
        old = row.get(k)
        if old is None:
            row[k] = (-re, -im)
        else:
            re, im = old[0] - re, old[1] - im
            if re or im:
                row[k] = (re, im)
            else:
                del row[k]


class _Echelon:
    """Incremental row echelon form with first-nonzero pivoting and monic pivots.

    With ``track`` each row carries a tag recording it as a combination of the
    input rows.
    """

    def __init__(self, track: bool = False):
        self.pivots: dict[int, tuple[dict, dict | None]] = {}
        self.track = track

    def _eliminate(self, row: dict, tag: dict | None, c: int) -> None:
        prow, ptag = self.pivots[c]
        t = row[c]
        _axpy(row, t, prow)
        if self.track:
            _axpy(tag, t, ptag)

    def add(self, row: dict, tag: dict | None = None) -> bool:
        while row:
            c = min(row)
            if c not in self.pivots:
                inv = _ginv(row[c])
                row = {k: _gmul(inv, v) for k, v in row.items()}
                if self.track:
                    tag = {k: _gmul(inv, v) for k, v in tag.items()}
                self.pivots[c] = (row, tag)
                return True
            self._eliminate(row, tag, c)
        return False

    def back_substitute(self) -> None:
        """Clear every pivot column from the other pivot rows (full RREF)."""
        for c in sorted(self.pivots, reverse=True):
            row, tag = self.pivots[c]
            for k in sorted(k for k in row if k != c and k in self.pivots):
                if k in row:
                    self._eliminate(row, tag, k)


@dataclass(frozen=True)
class NullspaceReport:
    nullity: int
    rank: int
    basis: tuple[tuple[GaussRational, ...], ...]
    core: tuple[int, ...]
    core_zero: bool

    def to_dict(self, window: Window | None = None) -> dict:
        out = {
            "nullity": self.nullity,
            "rank": self.rank,
            "core_size": len(self.core),
            "core_zero": self.core_zero,
        }
        if window is not None:
            out["core_points"] = [window.point(k).to_strings() for k in self.core]
        out["basis"] = [[v.to_strings() for v in vec] for vec in self.basis]
        return out


def core_columns(cs: ConstraintSystem) -> tuple[int, ...]:
    """Columns covered by some placement image for every group variant."""
    if not cs.rows:
        return ()
    cover = [set() for _ in range(cs.n_variants)]
    if cs.configuration is not None and cs.placements:
        for pl, v in zip(cs.placements, cs.variants):
            cover[v].update(cs.window.index(z) for z in apply_placement(pl, cs.configuration))
    else:
        for row, v in zip(cs.rows, cs.variants):
            cover[v].update(col for col, _ in row)
    return tuple(sorted(set.intersection(*cover)))


def _echelon_for(cs: ConstraintSystem, track: bool = False) -> _Echelon:
    ech = _Echelon(track=track)
    one = (_Q(1), _Q(0))
    for i, row in enumerate(cs.rows):
        ech.add({c: _to_q(v) for c, v in row}, {i: one} if track else None)
    return ech


def exact_nullspace(cs: ConstraintSystem) -> NullspaceReport:
    """Exact kernel basis; each basis vector has first nonzero entry 1."""
    ech = _echelon_for(cs)
    ech.back_substitute()
    ncols = cs.n_cols
    pivots = ech.pivots
    free = [k for k in range(ncols) if k not in pivots]
    zero = GaussRational(0)
    by_free: dict[int, list[int]] = {f: [] for f in free}
    for c, (row, _) in pivots.items():
        for k in row:
            if k != c:
                by_free[k].append(c)
    basis = []
    for f in free:
        vec = [zero] * ncols
        vec[f] = ONE
        for c in by_free[f]:
            vec[c] = -_from_q(pivots[c][0][f])
        lead = next(x for x in vec if not x.is_zero())
        if lead != ONE:
            vec = [x / lead for x in vec]
        basis.append(tuple(vec))
    core = core_columns(cs)
    core_zero = bool(core) and all(vec[k].is_zero() for vec in basis for k in core)
    return NullspaceReport(len(free), len(pivots), tuple(basis), core, core_zero)


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class DeltaCertificate:
    coefficients: tuple[GaussRational, ...]
    target: GaussRational

    def combination(self, cs: ConstraintSystem) -> dict[int, GaussRational]:
        acc: dict[int, GaussRational] = {}
        for coef, row in zip(self.coefficients, cs.rows):
            if coef.is_zero():
                continue
            for col, val in row:
                acc[col] = acc.get(col, GaussRational(0)) + coef * val
        return {k: v for k, v in acc.items() if not v.is_zero()}

    def verify(self, cs: ConstraintSystem) -> bool:
        """Sum of coefficient * row is exactly the unit functional at target."""
        if len(self.coefficients) != cs.n_rows:
            return False
        col = cs.window.index(self.target)
        return self.combination(cs) == {col: ONE}

    def to_dict(self) -> dict:
        return {"target": self.target.to_strings(),
                "coefficients": [c.to_strings() for c in self.coefficients]}


def delta_certificate(cs: ConstraintSystem, target) -> DeltaCertificate | None:
    """Coefficients c with sum_i c_i row_i = delta_target, or None when the
    point evaluation is outside the row space."""
    target = GaussRational.coerce(target)
    col = cs.window.index(target)
    if col is None:
        raise ValueError(f"target {target} is not a window point")
    ech = _echelon_for(cs, track=True)
    # invariant: e_target = t_row + sum_i tau_i * row_i
    t_row = {col: (_Q(1), _Q(0))}
    tau: dict = {}
    while t_row:
        c = min(t_row)
        piv = ech.pivots.get(c)
        if piv is None:
            return None
        prow, ptag = piv
        t = t_row[c]
        _axpy(t_row, t, prow)
        _axpy(tau, (-t[0], -t[1]), ptag)
    zero = GaussRational(0)
    coeffs = [_from_q(tau[i]) if i in tau else zero for i in range(cs.n_rows)]
    cert = DeltaCertificate(tuple(coeffs), target)
    assert cert.verify(cs)
    return cert


def difference_certificate(cs: ConstraintSystem) -> list[tuple[GaussRational, GaussRational]]:
    """Point pairs (a, b) with row_i - row_j proportional to f(a) - f(b)."""
    buckets: dict[frozenset, list[tuple[int, GaussRational]]] = {}
    for row in cs.rows:
        for k, (col, val) in enumerate(row):
            rest = frozenset(row[:k] + row[k + 1:])
            buckets.setdefault(rest, []).append((col, val))
    pairs = set()
    for entries in buckets.values():
        for i in range(len(entries)):
            for j in range(i + 1, len(entries)):
                (ca, va), (cb, vb) = entries[i], entries[j]
                if ca != cb and va == vb:
                    pairs.add((min(ca, cb), max(ca, cb)))
    return [(cs.window.point(a), cs.window.point(b)) for a, b in sorted(pairs)]


def _iterated_difference(values, base: int, steps, window: Window):
    """Sum over subsets S of (-1)**(k-|S|) v(x + sum_S h), or None if an
    evaluation point leaves the window."""
    k = len(steps)
    x0 = window.point(base)
    total = 0
    for mask in range(1 << k):
        z = x0
        bits = 0
        for i in range(k):
            if mask >> i & 1:
                z = z + steps[i]
                bits += 1
        idx = window.index(z)
        if idx is None:
            return None
        term = values[idx]
        total = total + term if (k - bits) % 2 == 0 else total - term
    return total


def difference_degree_test(v: Sequence, c: Configuration, w: Window,
                           units: Sequence = (ONE,), tol: float | None = None) -> bool:
    """True iff every (n-1)-fold iterated difference of v vanishes, steps
    drawn from ``u * delta / d`` (u in units, delta in {1, 2})."""
    if len(v) != len(w):
        raise ValueError("vector length does not match the window")
    k = len(c.points) - 1
    steps: list[GaussRational] = []
    for u in units:
        u = GaussRational.coerce(u)
        for delta in (1, 2):
            h = u * Fraction(delta, w.denominator)
            if h not in steps:
                steps.append(h)
    admissible = 0
    for tup in combinations_with_replacement(steps, k):
        for base in range(len(w)):
            val = _iterated_difference(v, base, tup, w)
            if val is None:
                continue
            admissible += 1
            if tol is None:
                if val != 0:
                    return False
            elif abs(complex(val)) > tol:
                return False
    if admissible == 0:
        raise InsufficientWindow("no step tuple keeps the differences inside the window")
    return True


def kernel_csv(vector: Sequence[GaussRational], w: Window) -> str:
    """CSV with columns x, y, re, im; exact values rendered as p/q."""
    buf = io.StringIO()
    buf.write("x,y,re,im\n")
    for k, val in enumerate(vector):
        p = w.point(k)
        buf.write(f"{p.re},{p.im},{val.re},{val.im}\n")
    return buf.getvalue()
