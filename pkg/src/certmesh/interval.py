"""Exact rational intervals, boxes, and the box operation used for
exclusion and segregation certificates.

The box operation encloses the range of a polynomial on a box.  Each
variable is first translated to the lower corner of the box, so that every
coordinate ranges over ``[0, w]``; the translated polynomial is then split
as ``F = F+ - F-`` with ``F+`` and ``F-`` having only positive coefficients,
and

``F+(0) - F-(w) <= F(p) <= F+(w) - F-(0)``  for every ``p`` in the box,

since both parts are monotone on the nonnegative orthant.  All arithmetic is
exact, so no outward rounding is needed.

Examples
========

>>> from certmesh.interval import Box, box_eval, excludes_zero
>>> box_eval("x^2 - 2", Box.from_pairs([(1, 2)]))
Interval(-1, 2)
>>> excludes_zero("x^2 - 2", Box.from_pairs([("3/2", 2)]))
True
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import flint

from .errors import DimensionMismatch, ParseError
from .ratpoly import CTX, Polynomial, Q, _raw

__all__ = ["Interval", "Box", "as_box", "box_eval", "excludes_zero", "parse_box",
           "sign_on_box"]

_GENS = CTX.gens()


@dataclass(frozen=True)
class Interval:
    """Closed rational interval ``[lo, hi]``; ``lo == hi`` is allowed."""

    lo: flint.fmpq
    hi: flint.fmpq

    def __init__(self, lo, hi=None):
        lo = Q(lo)
        hi = lo if hi is None else Q(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> flint.fmpq:
        return self.hi - self.lo

    @property
    def mid(self) -> flint.fmpq:
        return (self.lo + self.hi) / 2

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, v) -> bool:
        if isinstance(v, Interval):
            return self.lo <= v.lo and v.hi <= self.hi
        v = Q(v)
        return self.lo <= v <= self.hi

    __contains__ = contains

    def intersects(self, other: "Interval") -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0

    def sign(self) -> int:
        """Sign of every element, or 0 when the interval straddles zero."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        return 0

    def split(self, at=None) -> tuple:
        m = self.mid if at is None else Q(at)
        return Interval(self.lo, m), Interval(m, self.hi)

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __repr__(self):
        return f"Interval({self.lo}, {self.hi})"

    def to_json(self) -> list:
        return [str(self.lo), str(self.hi)]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in 1 to 3 dimensions over ``(x, y, z)``."""

    dims: tuple

    def __init__(self, dims: Iterable):
        dims = tuple(d if isinstance(d, Interval) else Interval(*d) for d in dims)
        if not 1 <= len(dims) <= 3:
            raise DimensionMismatch(f"boxes have 1 to 3 dimensions, got {len(dims)}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_pairs(cls, pairs: Sequence) -> "Box":
        return cls(Interval(a, b) for a, b in pairs)

    @classmethod
    def point(cls, coords: Sequence) -> "Box":
        return cls(Interval(c) for c in coords)

    def __len__(self):
        return len(self.dims)

    def __getitem__(self, i) -> Interval:
        return self.dims[i]

    def __iter__(self):
        return iter(self.dims)

    @property
    def length(self) -> flint.fmpq:
        """Largest side length."""
        return max(d.width for d in self.dims)

    @property
    def lo(self) -> tuple:
        return tuple(d.lo for d in self.dims)

    @property
    def hi(self) -> tuple:
        return tuple(d.hi for d in self.dims)

    @property
    def mid(self) -> tuple:
        return tuple(d.mid for d in self.dims)

    def contains(self, other) -> bool:
        if isinstance(other, Box):
            return all(a.contains(b) for a, b in zip(self.dims, other.dims))
        return all(a.contains(v) for a, v in zip(self.dims, other))

    def intersects(self, other: "Box") -> bool:
        return all(a.intersects(b) for a, b in zip(self.dims, other.dims))

    def replace(self, i: int, iv) -> "Box":
        d = list(self.dims)
        d[i] = iv if isinstance(iv, Interval) else Interval(*iv)
        return Box(d)

    def face(self, i: int, upper: bool) -> "Box":
        """The face ``coordinate_i = hi`` (``upper``) or ``= lo``."""
        v = self.dims[i].hi if upper else self.dims[i].lo
        return self.replace(i, Interval(v))

    def split(self, i: int | None = None) -> tuple:
        """Halve along dimension ``i`` (default: the widest, lowest index)."""
        if i is None:
            w = [d.width for d in self.dims]
            i = w.index(max(w))
        a, b = self.dims[i].split()
        return self.replace(i, a), self.replace(i, b)

    def volume(self) -> flint.fmpq:
        v = Q(1)
        for d in self.dims:
            v *= d.width
        return v

    def __repr__(self):
        return "Box(" + " x ".join(f"[{d.lo}, {d.hi}]" for d in self.dims) + ")"

    def __str__(self):
        return "x".join(f"[{d.lo},{d.hi}]" for d in self.dims)

    def to_json(self) -> list:
        return [d.to_json() for d in self.dims]


def as_box(B) -> Box:
    """Coerce a :class:`Box`, a box literal or a sequence of pairs."""
    if isinstance(B, str):
        return parse_box(B)
    return B if isinstance(B, Box) else Box(B)


def box_eval(f, B) -> Interval:
    """Enclosure of ``{f(p) : p in B}``.

    Two sound enclosures are intersected: the corner-translated split
    described in the module docstring (tight on small boxes), and the same
    split applied without translation on each sign orthant of ``B`` after
    reflecting negative coordinates (tight on large boxes around the origin).

    Raises :class:`DimensionMismatch` when ``f`` involves a variable beyond
    the dimension of ``B``.

    >>> box_eval("x*y", Box.from_pairs([(0, 1), (0, 1)]))
    Interval(0, 1)
    >>> box_eval("x^2 - 2*x*y", Box.point([3, "1/2"]))
    Interval(6, 6)
    >>> box_eval("x^2 + 1", Box.from_pairs([(-5, 5)]))
    Interval(1, 26)
    """
    raw = _raw(f)
    B = as_box(B)
    n = len(B.dims)
    if raw.is_zero():
        return Interval(0, 0)
    degs = raw.degrees()
    for i in range(n, 3):
        if degs[i] > 0:
            raise DimensionMismatch(
                f"polynomial uses variable {'xyz'[i]} but the box has {n} dimensions")
    lo = [d.lo for d in B.dims] + [Q(0)] * (3 - n)
    hi = [d.hi for d in B.dims] + [Q(0)] * (3 - n)
    w = [b - a for a, b in zip(lo, hi)]
    if all(w[i] == 0 for i in range(3) if degs[i] > 0):
        v = raw(*lo)
        return Interval(v, v)
    if any(lo[i] != 0 for i in range(3) if degs[i] > 0):
        shifted = raw.compose(*[g + c if degs[i] > 0 and c != 0 else g
                                for i, (g, c) in enumerate(zip(_GENS, lo))])
    else:
        shifted = raw
    a, b = _enclose_translated(shifted, w)
    if any(lo[i] < 0 for i in range(3) if degs[i] > 0):
        c, d = _enclose_orthants(raw, lo, hi, degs)
        a = max(a, c)
        b = min(b, d)
    return Interval(a, b)


def _enclose_translated(raw, w) -> tuple:
    """Range enclosure of ``raw`` on ``[0, w0] x [0, w1] x [0, w2]``:
    ``[F+(0) - F-(w), F+(w) - F-(0)]``."""
    pos = Q(0)
    neg = Q(0)
    c0 = Q(0)
    pw = [{0: Q(1)}, {0: Q(1)}, {0: Q(1)}]

    def power(i, e):
        t = pw[i]
        v = t.get(e)
        if v is None:
            v = w[i] ** e
            t[e] = v
        return v

    for m, c in zip(raw.monoms(), raw.coeffs()):
        a, b, cc = int(m[0]), int(m[1]), int(m[2])
        if a == 0 and b == 0 and cc == 0:
            c0 = c
            continue
        v = c
        if a:
            v = v * power(0, a)
        if b:
            v = v * power(1, b)
        if cc:
            v = v * power(2, cc)
        if c > 0:
            pos += v
        else:
            neg -= v
    return c0 - neg, c0 + pos


def _enclose_orthants(raw, lo, hi, degs) -> tuple:
    """Hull of the untranslated split over each sign orthant of the box."""
    pieces = [[]]
    for i in range(3):
        opts = []
        if degs[i] == 0:
            opts = [(Q(0), Q(0), 1)]
        elif lo[i] >= 0:
            opts = [(lo[i], hi[i], 1)]
        elif hi[i] <= 0:
            opts = [(-hi[i], -lo[i], -1)]
        else:
            opts = [(Q(0), hi[i], 1), (Q(0), -lo[i], -1)]
        pieces = [p + [o] for p in pieces for o in opts]
    terms = [((int(m[0]), int(m[1]), int(m[2])), c)
             for m, c in zip(raw.monoms(), raw.coeffs())]
    best_lo = best_hi = None
    for piece in pieces:
        s_lo = Q(0)
        s_hi = Q(0)
        for e, c in terms:
            vl = c
            vh = c
            for i in range(3):
                if e[i]:
                    L, H, sg = piece[i]
                    if sg < 0 and e[i] % 2:
                        vl, vh = -vl, -vh
                    vl = vl * L ** e[i]
                    vh = vh * H ** e[i]
            if vl <= vh:
                s_lo += vl
                s_hi += vh
            else:
                s_lo += vh
                s_hi += vl
        best_lo = s_lo if best_lo is None else min(best_lo, s_lo)
        best_hi = s_hi if best_hi is None else max(best_hi, s_hi)
    return best_lo, best_hi


def excludes_zero(f, B) -> bool:
    """Certificate that ``f`` has no zero in ``B``; ``False`` is inconclusive.

    >>> excludes_zero("x^2 + 1", Box.from_pairs([(-5, 5)]))
    True
    >>> excludes_zero("x", Box.from_pairs([(-1, 1)]))
    False
    """
    return box_eval(f, B).excludes_zero()


def sign_on_box(f, B) -> int:
    """Sign of ``f`` certified on all of ``B``, or 0 when inconclusive."""
    return box_eval(f, B).sign()


_NUM = r"\s*([+-]?\d+(?:/\d+)?)\s*"
_IV = re.compile(r"\s*\[" + _NUM + "," + _NUM + r"\]\s*")


def parse_box(text: str) -> Box:
    """Parse a box literal such as ``"[-2,2]x[-2,2]x[-2,2]"``.

    >>> parse_box("[-3/2,3/2]x[-5/4,5/4]")
    Box([-3/2, 3/2] x [-5/4, 5/4])
    """
    pos = 0
    dims = []
    while True:
        m = _IV.match(text, pos)
        if not m:
            raise ParseError("expected an interval '[lo,hi]'", 1, pos + 1)
        lo, hi = Q(m.group(1)), Q(m.group(2))
        if lo >= hi:
            raise ParseError(f"interval [{lo},{hi}] must have lo < hi", 1, m.start() + 1)
        dims.append(Interval(lo, hi))
        pos = m.end()
        if pos == len(text):
            break
        if text[pos] not in "xX*":
            raise ParseError("expected 'x' between intervals", 1, pos + 1)
        pos += 1
    if len(dims) > 3:
        raise ParseError("at most three intervals are allowed", 1, 1)
    return Box(dims)
