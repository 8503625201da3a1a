"""Real root isolation for triangular systems, with exact sign decisions at
algebraic points.

A point with algebraic coordinates is kept as a *tower*:

* level 1: ``alpha``, a root of an irreducible ``h(x)`` in ``Q[x]`` with an
  isolating interval (a rational ``alpha`` has ``h = x - alpha``);
* level 2: ``beta``, a simple root of a monic square-free ``m(alpha, y)``
  whose coefficients live in the field ``K = Q[x]/(h)``;
* level 3: ``gamma``, a simple root of a square-free ``t(alpha, beta, z)``
  with coefficients in ``L = K[y]/(m)``.

Zero tests are exact.  ``L`` is not a field when ``m`` is reducible over
``K``; whenever a zero divisor shows up, ``m`` is split by a gcd and the
factor that vanishes at ``beta`` is kept (sign change of the factor across
the isolating interval of ``beta`` decides).  Nonzero values get their sign
from the box operation on ever smaller isolating boxes, which terminates
because the value is nonzero.

Univariate polynomials over ``Q`` are isolated with Descartes' rule of
signs and bisection; fibres over algebraic points are isolated by interval
bisection, using the box operation for exclusion and for monotonicity (a
certified nonzero derivative), and exact endpoint signs.

Roots on the boundary of a query interval are reported when the interval is
closed; with ``half_open=True`` a root at the upper endpoint is dropped
(lower-closed, upper-open).

Examples
========

>>> from certmesh.rootiso import root_isolate
>>> from certmesh.interval import Box
>>> pts = root_isolate(["x^2 - 2"], Box.from_pairs([(0, 2)]), "1/16")
>>> len(pts), pts[0].box.length < Q("1/16")
(1, True)
>>> pts = root_isolate(["x^2 - 2", "y^2 - x"], Box.from_pairs([(0, 2), (0, 2)]), "1/32")
>>> [round(float(v), 1) for v in pts[0].box.mid]
[1.4, 1.2]
"""

from __future__ import annotations

from typing import Callable, Sequence

import flint
from flint import fmpq, fmpq_poly, fmpz_poly

from .errors import NonSquareFreeLevel, ZeroLevelPolynomial, DimensionMismatch
from .interval import Box, Interval, as_box, box_eval
from .ratpoly import CTX, Polynomial, Q, _raw

__all__ = [
    "isolate_real_roots", "RealAlgebraic", "real_roots", "FiberPoint",
    "fiber_roots", "LiftedRoot", "lift_roots", "AlgebraicPoint",
    "root_isolate", "refine", "upoly", "Q",
]

_X, _Y, _Z = CTX.gens()
_ONE = fmpq(1)
_ZERO = fmpq(0)
_SHIFT1 = fmpz_poly([1, 1])
#: bisection depth beyond which a fibre is declared non-square-free
_MAX_DEPTH = 400


def upoly(p) -> fmpq_poly:
    """Univariate ``fmpq_poly`` from a polynomial in ``x`` only (or a list of
    coefficients, lowest degree first)."""
    if isinstance(p, fmpq_poly):
        return p
    if isinstance(p, (list, tuple)):
        return fmpq_poly([Q(c) for c in p])
    raw = _raw(p)
    if raw.degrees()[1] > 0 or raw.degrees()[2] > 0:
        raise DimensionMismatch("expected a polynomial in x only")
    d = raw.degrees()[0] if not raw.is_zero() else 0
    coeffs = [_ZERO] * (d + 1)
    for m, c in zip(raw.monoms(), raw.coeffs()):
        coeffs[int(m[0])] = c
    return fmpq_poly(coeffs)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


# ---------------------------------------------------------------------------
# univariate isolation over Q
# ---------------------------------------------------------------------------

def _squarefree(p: fmpq_poly) -> fmpq_poly:
    g = p.gcd(p.derivative())
    if g.degree() > 0:
        p = p // g
    return p


def _descartes(p: fmpq_poly, a: fmpq, b: fmpq) -> int:
    """Sign variations bounding the number of roots of ``p`` in ``(a, b)``;
    exact when the bound is 0 or 1."""
    q = p(fmpq_poly([a, b - a])).numer()
    c = q.coeffs()
    n = p.degree()
    c = c + [0] * (n + 1 - len(c))
    s = fmpz_poly(c[::-1])(_SHIFT1).coeffs()
    var = 0
    last = 0
    for v in s:
        if v != 0:
            sv = 1 if v > 0 else -1
            if last and sv != last:
                var += 1
            last = sv
    return var


def _tighten(p: fmpq_poly, a: fmpq, b: fmpq) -> tuple:
    """Shrink an interval holding exactly one root of ``p`` in ``(a, b)`` until
    neither endpoint is a root."""
    while p(a) == 0 or p(b) == 0:
        m = (a + b) / 2
        if p(m) == 0:
            return m, m
        if _descartes(p, a, m) == 1:
            b = m
        else:
            a = m
    return a, b


def _bisect_sign(p_eval: Callable, a, b, sa) -> tuple:
    m = (a + b) / 2
    sm = p_eval(m)
    if sm == 0:
        return m, m, 0
    if sm == sa:
        return m, b, sm
    return a, m, sa


def isolate_real_roots(p, lo, hi, half_open: bool = False) -> list:
    """Isolating intervals ``(a, b)`` of the distinct real roots of the
    univariate ``p`` in ``[lo, hi]`` (or ``[lo, hi)``), sorted.

    A rational root may come back as ``(r, r)``; otherwise ``p`` changes sign
    strictly between ``a`` and ``b`` and neither endpoint is a root.  The
    returned intervals are pairwise disjoint.

    >>> isolate_real_roots([-2, 0, 1], -2, 2)
    [(-2, -1), (0, 2)]
    >>> isolate_real_roots([0, -1, 0, 1], -1, 1, half_open=True)
    [(-1, -1), (0, 0)]
    """
    p = upoly(p)
    lo, hi = Q(lo), Q(hi)
    if p.is_zero():
        raise ZeroLevelPolynomial("cannot isolate the roots of the zero polynomial")
    if p.degree() <= 0:
        return []
    p = _squarefree(p)
    out = []
    if p(lo) == 0:
        out.append((lo, lo))
    if hi > lo and not half_open and p(hi) == 0:
        out.append((hi, hi))
    if hi > lo:
        stack = [(lo, hi)]
        while stack:
            a, b = stack.pop()
            v = _descartes(p, a, b)
            if v == 0:
                continue
            if v == 1:
                out.append(_tighten(p, a, b))
                continue
            m = (a + b) / 2
            if p(m) == 0:
                out.append((m, m))
            stack.append((m, b))
            stack.append((a, m))
    out.sort()
    return _separate(out, lambda t: _sign(p(t)))


def _separate(ivs: list, sign_at: Callable) -> list:
    """Refine sorted isolating intervals until consecutive ones are strictly
    disjoint.  Non-degenerate intervals must carry a sign change."""
    ivs = [list(t) for t in ivs]
    changed = True
    while changed:
        changed = False
        for i in range(len(ivs) - 1):
            A, B = ivs[i], ivs[i + 1]
            while A[1] >= B[0]:
                changed = True
                if A[0] < A[1]:
                    a, b, _ = _bisect_sign(sign_at, A[0], A[1], sign_at(A[0]))
                    A[0], A[1] = a, b
                if A[1] >= B[0] and B[0] < B[1]:
                    a, b, _ = _bisect_sign(sign_at, B[0], B[1], sign_at(B[0]))
                    B[0], B[1] = a, b
                if A[0] == A[1] and B[0] == B[1] and A[0] == B[0]:
                    raise NonSquareFreeLevel("duplicate exact root")
    return [tuple(t) for t in ivs]


def _uni_enclose(p: fmpq_poly, lo: fmpq, hi: fmpq) -> tuple:
    """Enclosure of ``p`` on ``[lo, hi]`` via a Taylor shift to ``lo``."""
    if lo == hi:
        v = p(lo)
        return v, v
    q = p(fmpq_poly([lo, 1])).coeffs() if lo != 0 else p.coeffs()
    w = hi - lo
    if not q:
        return _ZERO, _ZERO
    c0 = q[0]
    pos = _ZERO
    neg = _ZERO
    wp = _ONE
    for c in q[1:]:
        wp = wp * w
        if c > 0:
            pos += c * wp
        elif c < 0:
            neg -= c * wp
    return c0 - neg, c0 + pos


# ---------------------------------------------------------------------------
# level 1: real algebraic numbers
# ---------------------------------------------------------------------------

class RealAlgebraic:
    """A real root of an irreducible ``poly`` isolated in ``[lo, hi]``.

    Rational numbers have a linear ``poly`` and ``lo == hi``.  Refinement
    mutates the interval in place; the represented number never changes.

    >>> r = RealAlgebraic.roots_of([-2, 0, 1], 0, 2)[0]
    >>> r.sign_of([-1, 0, 1]), r.sign_of([-2, 0, 1]), r.sign_of([-3, 2])
    (1, 0, -1)
    """

    __slots__ = ("poly", "lo", "hi", "_slo")

    def __init__(self, poly: fmpq_poly, lo, hi):
        self.poly = poly
        self.lo = Q(lo)
        self.hi = Q(hi)
        self._slo = None

    @classmethod
    def rational(cls, v) -> "RealAlgebraic":
        v = Q(v)
        return cls(fmpq_poly([-v, 1]), v, v)

    @classmethod
    def roots_of(cls, p, lo, hi, half_open: bool = False) -> list:
        """Sorted distinct real roots of ``p`` in ``[lo, hi]``."""
        p = upoly(p)
        if p.is_zero():
            raise ZeroLevelPolynomial("cannot isolate the roots of the zero polynomial")
        if p.degree() <= 0:
            return []
        out = []
        _, facs = p.factor()
        for f, _m in facs:
            f = f / f.leading_coefficient()
            if f.degree() == 1:
                r = -f.coeffs()[0]
                if Q(lo) <= r and (r < Q(hi) or (r == Q(hi) and not half_open)):
                    out.append(cls.rational(r))
                continue
            for a, b in isolate_real_roots(f, lo, hi, half_open):
                if a == b:
                    out.append(cls.rational(a))
                else:
                    out.append(cls(f, a, b))
        return sort_disjoint(out)

    def copy(self) -> "RealAlgebraic":
        return RealAlgebraic(self.poly, self.lo, self.hi)

    def is_rational(self) -> bool:
        return self.lo == self.hi

    @property
    def interval(self) -> Interval:
        return Interval(self.lo, self.hi)

    @property
    def width(self) -> fmpq:
        return self.hi - self.lo

    def _sign_lo(self) -> int:
        if self._slo is None:
            self._slo = _sign(self.poly(self.lo))
        return self._slo

    def refine_once(self):
        if self.lo == self.hi:
            return
        m = (self.lo + self.hi) / 2
        sm = _sign(self.poly(m))
        if sm == 0:
            self.lo = self.hi = m
            self.poly = fmpq_poly([-m, 1])
        elif sm == self._sign_lo():
            self.lo = m
        else:
            self.hi = m

    def refine(self, eps) -> "RealAlgebraic":
        eps = Q(eps)
        while self.hi - self.lo >= eps and self.lo != self.hi:
            self.refine_once()
        return self

    def reduce(self, q) -> fmpq_poly:
        q = upoly(q)
        return q % self.poly

    def sign_of(self, q) -> int:
        """Exact sign of ``q(alpha)`` for ``q`` in ``Q[x]``."""
        q = upoly(q)
        if self.lo == self.hi:
            return _sign(q(self.lo))
        r = q % self.poly
        if r.is_zero():
            return 0
        if r.degree() == 0:
            return _sign(r.coeffs()[0])
        while True:
            a, b = _uni_enclose(r, self.lo, self.hi)
            if a > 0:
                return 1
            if b < 0:
                return -1
            self.refine_once()

    def compare(self, other: "RealAlgebraic") -> int:
        """-1, 0, 1 as ``self`` is below, equal to, or above ``other``."""
        if self.lo == self.hi and other.lo == other.hi:
            return _sign(self.lo - other.lo)
        if self.lo == self.hi:
            return -other.sign_of(fmpq_poly([-self.lo, 1])) if other.lo != other.hi else 0
        if other.lo == other.hi:
            return self.sign_of(fmpq_poly([-other.lo, 1]))
        if self.poly == other.poly:
            # each interval holds exactly one root of the same polynomial, so
            # they agree iff the overlap holds a root
            a, b = max(self.lo, other.lo), min(self.hi, other.hi)
            if a <= b:
                sa, sb = _sign(self.poly(a)), _sign(self.poly(b))
                if sa == 0 or sb == 0 or sa != sb:
                    return 0
        while True:
            if self.hi < other.lo:
                return -1
            if other.hi < self.lo:
                return 1
            if self.width >= other.width:
                self.refine_once()
            else:
                other.refine_once()

    def __lt__(self, other):
        return self.compare(other) < 0

    def __float__(self):
        return float((self.lo + self.hi) / 2)

    def __repr__(self):
        if self.lo == self.hi:
            return f"RealAlgebraic({self.lo})"
        return f"RealAlgebraic(root of {self.poly} in [{self.lo}, {self.hi}])"


def sort_disjoint(nums: list) -> list:
    """Sort distinct real algebraic numbers, refining until their intervals
    are pairwise disjoint."""
    nums = list(nums)
    changed = True
    while changed:
        changed = False
        nums.sort(key=lambda r: (r.lo, r.hi))
        for i in range(len(nums) - 1):
            a, b = nums[i], nums[i + 1]
            if a.hi >= b.lo:
                if a.compare(b) == 0:
                    raise NonSquareFreeLevel("duplicate root in a list of distinct roots")
                while not (a.hi < b.lo or b.hi < a.lo):
                    if a.width >= b.width:
                        a.refine_once()
                    else:
                        b.refine_once()
                changed = True
    return nums


def real_roots(p, lo, hi, half_open: bool = False) -> list:
    """Distinct real roots of a univariate polynomial as :class:`RealAlgebraic`."""
    return RealAlgebraic.roots_of(p, lo, hi, half_open)


# ---------------------------------------------------------------------------
# polynomials over K = Q[x]/(h): lists of fmpq_poly, lowest degree first
# ---------------------------------------------------------------------------

def _kp_trim(p: list) -> list:
    while p and p[-1].is_zero():
        p.pop()
    return p


def _k_inv(c: fmpq_poly, h: fmpq_poly) -> fmpq_poly:
    g, s, _t = c.xgcd(h)
    if g.degree() != 0:
        raise ZeroDivisionError("element is not invertible modulo h")
    return (s / g.coeffs()[0]) % h


def _kp_scale(p: list, c: fmpq_poly, h: fmpq_poly) -> list:
    return [(a * c) % h for a in p]


def _kp_monic(p: list, h: fmpq_poly) -> list:
    if not p:
        return p
    lc = p[-1]
    if lc.degree() == 0 and lc.coeffs()[0] == 1:
        return p
    return _kp_scale(p, _k_inv(lc, h), h)


def _kp_sub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else None
        y = b[i] if i < len(b) else None
        if x is None:
            out.append(-y)
        elif y is None:
            out.append(x)
        else:
            out.append(x - y)
    return _kp_trim(out)


def _kp_mul(a: list, b: list, h: fmpq_poly) -> list:
    if not a or not b:
        return []
    out = [fmpq_poly(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return _kp_trim([c % h for c in out])


def _kp_divmod(a: list, b: list, h: fmpq_poly) -> tuple:
    """Division by a monic ``b``."""
    a = list(a)
    db = len(b) - 1
    if len(a) - 1 < db:
        return [], _kp_trim(a)
    q = [fmpq_poly(0)] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i]
        if c.is_zero():
            continue
        q[i - db] = c
        for j in range(db + 1):
            a[i - db + j] = (a[i - db + j] - c * b[j]) % h
    return _kp_trim(q), _kp_trim(a[:db])


def _kp_gcd(a: list, b: list, h: fmpq_poly) -> list:
    a = _kp_trim(list(a))
    b = _kp_trim(list(b))
    while b:
        b = _kp_monic(b, h)
        a, b = b, _kp_divmod(a, b, h)[1]
    return _kp_monic(a, h)


def _kp_inverse_mod(c: list, m: list, h: fmpq_poly) -> list:
    """Inverse of ``c`` modulo the monic ``m`` in ``K[y]`` (must be coprime)."""
    r0, r1 = list(m), _kp_divmod(c, m, h)[1]
    s0, s1 = [], [fmpq_poly(1)]
    while r1:
        inv = _k_inv(r1[-1], h)
        r1n = _kp_scale(r1, inv, h)
        s1n = _kp_scale(s1, inv, h)
        q, r = _kp_divmod(r0, r1n, h)
        r0, r1 = r1n, r
        s0, s1 = s1n, _kp_sub(s0, _kp_mul(q, s1n, h))
    if len(r0) != 1:
        raise ZeroDivisionError("not invertible modulo m")
    inv = _k_inv(r0[0], h)
    return _kp_divmod(_kp_scale(s0, inv, h), m, h)[1]


def _kp_deriv(p: list) -> list:
    return _kp_trim([p[i] * i for i in range(1, len(p))])


def _kp_eval(p: list, y0: fmpq) -> fmpq_poly:
    acc = fmpq_poly(0)
    for c in reversed(p):
        acc = acc * y0 + c
    return acc


def _kp_to_mpoly(p: list, var=_Y):
    out = CTX.from_dict({})
    for i, c in enumerate(p):
        if c.is_zero():
            continue
        cs = c.coeffs()
        d = {(k, i if var is _Y else 0, i if var is _Z else 0): v
             for k, v in enumerate(cs) if v != 0}
        out = out + CTX.from_dict(d)
    return out


def _split_by_var(raw, var: int) -> dict:
    """``{e: coefficient mpoly}`` grouping ``raw`` by the exponent of ``var``."""
    groups: dict = {}
    for m, c in zip(raw.monoms(), raw.coeffs()):
        m = [int(e) for e in m]
        e = m[var]
        m[var] = 0
        groups.setdefault(e, {})[tuple(m)] = c
    return groups


def _mpoly_x_to_upoly(d: dict) -> fmpq_poly:
    deg = max(k[0] for k in d)
    cs = [_ZERO] * (deg + 1)
    for k, v in d.items():
        cs[k[0]] = v
    return fmpq_poly(cs)


def _kp_from_mpoly(raw, h: fmpq_poly) -> list:
    """``P(x, y)`` as a polynomial in ``y`` over ``K = Q[x]/(h)``."""
    if raw.is_zero():
        return []
    if raw.degrees()[2] > 0:
        raise DimensionMismatch("expected a polynomial in x and y")
    groups = _split_by_var(raw, 1)
    out = [fmpq_poly(0)] * (max(groups) + 1)
    for e, d in groups.items():
        out[e] = _mpoly_x_to_upoly(d) % h
    return _kp_trim(out)


# ---------------------------------------------------------------------------
# generic fibre isolation by bisection
# ---------------------------------------------------------------------------

def _isolate_bisect(lo, hi, excl, mono, sign_at, refine_base, base_width,
                    half_open: bool) -> list:
    roots = []
    s_lo = sign_at(lo)
    s_hi = sign_at(hi)
    if s_lo == 0:
        roots.append((lo, lo))
    if s_hi == 0 and hi != lo and not half_open:
        roots.append((hi, hi))
    if hi > lo:
        stack = [(lo, hi, s_lo, s_hi, 0)]
        while stack:
            a, b, sa, sb, depth = stack.pop()
            if depth > _MAX_DEPTH:
                raise NonSquareFreeLevel("fibre isolation did not converge; "
                                         "the level polynomial is not square-free")
            w = b - a
            while base_width() * 4 > w:
                if not refine_base():
                    break
            if excl(a, b):
                continue
            if mono(a, b):
                if sa * sb < 0:
                    roots.append((a, b))
                continue
            m = (a + b) / 2
            sm = sign_at(m)
            if sm == 0:
                roots.append((m, m))
            stack.append((m, b, sm, sb, depth + 1))
            stack.append((a, m, sa, sm, depth + 1))
    roots.sort()
    return _separate(roots, sign_at)


# ---------------------------------------------------------------------------
# level 2: fibre points (alpha, beta)
# ---------------------------------------------------------------------------

class FiberPoint:
    """``(alpha, beta)`` with ``beta`` a simple root of ``m(alpha, y)``.

    ``m`` is monic over ``K = Q[x]/(h)`` where ``h = alpha.poly``; it may be
    replaced by a factor during zero tests.  ``[lo, hi]`` isolates ``beta``
    among the real roots of ``m(alpha, y)``; unless ``lo == hi`` (rational
    ``beta``) the endpoints are not roots.
    """

    __slots__ = ("alpha", "m", "lo", "hi", "_slo", "_mraw")

    def __init__(self, alpha: RealAlgebraic, m: list, lo, hi):
        self.alpha = alpha
        self.m = m
        self.lo = Q(lo)
        self.hi = Q(hi)
        self._slo = None
        self._mraw = None

    @classmethod
    def rational_y(cls, alpha: RealAlgebraic, y0) -> "FiberPoint":
        y0 = Q(y0)
        return cls(alpha, [fmpq_poly([-y0]), fmpq_poly([1])], y0, y0)

    def copy(self) -> "FiberPoint":
        return FiberPoint(self.alpha.copy(), list(self.m), self.lo, self.hi)

    @property
    def h(self) -> fmpq_poly:
        return self.alpha.poly

    @property
    def box(self) -> Box:
        return Box([Interval(self.alpha.lo, self.alpha.hi), Interval(self.lo, self.hi)])

    def is_rational(self) -> bool:
        return self.alpha.is_rational() and self.lo == self.hi

    def m_raw(self):
        if self._mraw is None:
            self._mraw = _kp_to_mpoly(self.m)
        return self._mraw

    def _set_m(self, m: list):
        self.m = _kp_monic(m, self.h)
        self._slo = None
        self._mraw = None

    # signs in K ----------------------------------------------------------------
    def _sign_m_at(self, y0) -> int:
        return self.alpha.sign_of(_kp_eval(self.m, y0))

    def refine_once(self):
        """Halve the interval of ``beta`` (and keep ``alpha`` comparable)."""
        if self.lo == self.hi:
            return
        if self._slo is None:
            self._slo = self._sign_m_at(self.lo)
        m = (self.lo + self.hi) / 2
        sm = self._sign_m_at(m)
        if sm == 0:
            self.lo = self.hi = m
            self._set_m([fmpq_poly([-m]), fmpq_poly([1])])
        elif sm == self._slo:
            self.lo = m
        else:
            self.hi = m

    def refine(self, eps) -> "FiberPoint":
        eps = Q(eps)
        while self.alpha.width >= eps and not self.alpha.is_rational():
            self.alpha.refine_once()
        while self.hi - self.lo >= eps:
            self.refine_once()
        return self

    def reduce(self, c: list) -> list:
        """Reduce a ``K[y]`` element modulo ``m``."""
        if len(c) < len(self.m):
            return c
        return _kp_divmod(c, self.m, self.h)[1]

    def kp(self, raw) -> list:
        """``raw(x, y)`` as a reduced element of ``K[y]/(m)``."""
        return self.reduce(_kp_from_mpoly(_raw(raw), self.h))

    def is_zero(self, c: list) -> bool:
        """Exact test ``c(alpha, beta) == 0`` for ``c`` in ``K[y]``; may split
        ``m``."""
        c = self.reduce(c)
        if not c:
            return True
        if len(c) == 1:
            return False
        g = _kp_gcd(c, self.m, self.h)
        if len(g) == 1:
            return False
        if self.lo == self.hi:
            vanishes = self.alpha.sign_of(_kp_eval(g, self.lo)) == 0
        else:
            sa = self.alpha.sign_of(_kp_eval(g, self.lo))
            sb = self.alpha.sign_of(_kp_eval(g, self.hi))
            vanishes = sa * sb < 0
        if vanishes:
            self._set_m(g)
        else:
            self._set_m(_kp_divmod(self.m, g, self.h)[0])
        return vanishes

    def sign_kp(self, c: list, raw=None) -> int:
        """Exact sign of ``c(alpha, beta)``."""
        if self.is_zero(c):
            return 0
        if raw is None:
            raw = _kp_to_mpoly(self.reduce(c))
        return self._sign_nonzero(raw)

    def _sign_nonzero(self, raw) -> int:
        while True:
            iv = box_eval(raw, self.box)
            if iv.lo > 0:
                return 1
            if iv.hi < 0:
                return -1
            if self.alpha.width >= self.hi - self.lo and not self.alpha.is_rational():
                self.alpha.refine_once()
            elif self.lo != self.hi:
                self.refine_once()
            else:
                self.alpha.refine_once()

    def sign(self, P) -> int:
        """Exact sign of a polynomial ``P(x, y)`` at the point."""
        raw = _raw(P)
        if self.is_rational():
            return _sign(raw(self.alpha.lo, self.lo, _ZERO))
        if self.is_zero(_kp_from_mpoly(raw, self.h)):
            return 0
        return self._sign_nonzero(raw)

    def inverse(self, c: list) -> list:
        """Inverse in ``K[y]/(m)`` of an element known to be nonzero at the
        point (after :meth:`is_zero` returned ``False`` for it)."""
        return _kp_inverse_mod(self.reduce(c), self.m, self.h)

    def system(self) -> tuple:
        return (Polynomial(fmpq_poly_to_mpoly(self.h)), Polynomial(self.m_raw()))

    def __repr__(self):
        return f"FiberPoint(x in [{self.alpha.lo}, {self.alpha.hi}], y in [{self.lo}, {self.hi}])"


def fmpq_poly_to_mpoly(p: fmpq_poly, var: int = 0):
    d = {}
    for k, v in enumerate(p.coeffs()):
        if v != 0:
            e = [0, 0, 0]
            e[var] = k
            d[tuple(e)] = v
    return CTX.from_dict(d)


def fiber_roots(alpha: RealAlgebraic, P, lo, hi, half_open: bool = False) -> list:
    """Distinct real roots ``beta`` of ``P(alpha, y)`` in ``[lo, hi]``.

    Raises :class:`ZeroLevelPolynomial` when ``P(alpha, y)`` vanishes
    identically.
    """
    raw = _raw(P)
    lo, hi = Q(lo), Q(hi)
    h = alpha.poly
    kp = _kp_from_mpoly(raw, h)
    if not kp:
        raise ZeroLevelPolynomial("the fibre polynomial vanishes identically")
    if len(kp) == 1:
        return []
    if alpha.is_rational():
        # everything is rational: use Descartes on the univariate fibre
        uni = fmpq_poly([c.coeffs()[0] if not c.is_zero() else _ZERO for c in kp])
        out = []
        sq = _squarefree(uni)
        sq = sq / sq.leading_coefficient()
        for a, b in isolate_real_roots(sq, lo, hi, half_open):
            if a == b:
                out.append(FiberPoint.rational_y(alpha, a))
            else:
                out.append(FiberPoint(alpha, [fmpq_poly([c]) for c in sq.coeffs()], a, b))
        return out
    g = _kp_gcd(kp, _kp_deriv(kp), h)
    s = _kp_divmod(_kp_monic(kp, h), g, h)[0] if len(g) > 1 else _kp_monic(kp, h)
    S = _kp_to_mpoly(s)
    Sy = S.derivative(1)

    def excl(a, b):
        return box_eval(S, Box([alpha.interval, Interval(a, b)])).excludes_zero()

    def mono(a, b):
        return box_eval(Sy, Box([alpha.interval, Interval(a, b)])).excludes_zero()

    def sign_at(t):
        return alpha.sign_of(_kp_eval(s, t))

    def refine_base():
        if alpha.is_rational():
            return False
        alpha.refine_once()
        return True

    ivs = _isolate_bisect(lo, hi, excl, mono, sign_at, refine_base,
                          lambda: alpha.width, half_open)
    out = []
    for a, b in ivs:
        if a == b:
            out.append(FiberPoint.rational_y(alpha, a))
        else:
            out.append(FiberPoint(alpha, list(s), a, b))
    return out


# ---------------------------------------------------------------------------
# level 3: roots of t(alpha, beta, z)
# ---------------------------------------------------------------------------

class LiftedRoot:
    """A simple real root ``gamma`` of ``t(alpha, beta, z)`` over a
    :class:`FiberPoint`, isolated in ``[lo, hi]``."""

    __slots__ = ("base", "t", "lo", "hi", "_slo", "_uni")

    def __init__(self, base: FiberPoint, t: list, lo, hi, uni: fmpq_poly | None = None):
        self.base = base
        self.t = t
        self.lo = Q(lo)
        self.hi = Q(hi)
        self._slo = None
        self._uni = uni

    def copy(self) -> "LiftedRoot":
        return LiftedRoot(self.base.copy(), self.t, self.lo, self.hi, self._uni)

    @property
    def box(self) -> Box:
        b = self.base.box
        return Box([b[0], b[1], Interval(self.lo, self.hi)])

    def _sign_at(self, z0) -> int:
        if self._uni is not None:
            # rational base point: a univariate polynomial in z
            return _sign(self._uni(z0))
        return _sign_lz_at(self.base, self.t, z0)

    def refine_once(self):
        if self.lo == self.hi:
            return
        if self._slo is None:
            self._slo = self._sign_at(self.lo)
        m = (self.lo + self.hi) / 2
        sm = self._sign_at(m)
        if sm == 0:
            self.lo = self.hi = m
        elif sm == self._slo:
            self.lo = m
        else:
            self.hi = m

    def refine(self, eps) -> "LiftedRoot":
        eps = Q(eps)
        self.base.refine(eps)
        while self.hi - self.lo >= eps:
            self.refine_once()
        return self

    def system(self) -> tuple:
        return self.base.system() + (Polynomial(_lz_to_mpoly(self.t)),)


def _lz_eval(pt: FiberPoint, t: list, z0) -> list:
    """``t(x, y, z0)`` as an element of ``K[y]``."""
    acc = []
    for c in reversed(t):
        acc = [a * z0 for a in acc]
        n = max(len(acc), len(c))
        acc = acc + [fmpq_poly(0)] * (n - len(acc))
        acc = [acc[i] + (c[i] if i < len(c) else 0) for i in range(n)]
    return _kp_trim(acc)


def _sign_lz_at(pt: FiberPoint, t: list, z0) -> int:
    return pt.sign_kp(_lz_eval(pt, t, Q(z0)))


def _lz_to_mpoly(t: list):
    out = CTX.from_dict({})
    for k, c in enumerate(t):
        if c:
            out = out + _kp_to_mpoly(c) * _Z ** k
    return out


def _lz_from_mpoly(pt: FiberPoint, raw) -> list:
    if raw.is_zero():
        return []
    groups = _split_by_var(raw, 2)
    out = [[] for _ in range(max(groups) + 1)]
    for e, d in groups.items():
        out[e] = pt.kp(CTX.from_dict(d))
    return out


def _lz_trim(pt: FiberPoint, t: list) -> list:
    t = [pt.reduce(c) for c in t]
    while t and pt.is_zero(t[-1]):
        t.pop()
    return t


def _lz_monic(pt: FiberPoint, t: list) -> list:
    inv = pt.inverse(t[-1])
    h = pt.h
    return [pt.reduce(_kp_mul(c, inv, h)) for c in t[:-1]] + [[fmpq_poly(1)]]


def _lz_rem(pt: FiberPoint, a: list, b: list) -> list:
    """Remainder of ``a`` by the monic ``b``."""
    h = pt.h
    a = list(a)
    db = len(b) - 1
    for i in range(len(a) - 1, db - 1, -1):
        c = pt.reduce(a[i])
        if not c:
            continue
        for j in range(db + 1):
            a[i - db + j] = pt.reduce(_kp_sub(a[i - db + j], _kp_mul(c, b[j], h)))
    return a[:db]


def _lz_quo(pt: FiberPoint, a: list, b: list) -> list:
    """Exact quotient of ``a`` by the monic ``b``."""
    h = pt.h
    a = list(a)
    db = len(b) - 1
    q = [[] for _ in range(len(a) - db)]
    for i in range(len(a) - 1, db - 1, -1):
        c = pt.reduce(a[i])
        q[i - db] = c
        if not c:
            continue
        for j in range(db + 1):
            a[i - db + j] = pt.reduce(_kp_sub(a[i - db + j], _kp_mul(c, b[j], h)))
    return q


def _lz_gcd(pt: FiberPoint, a: list, b: list) -> list:
    a = _lz_trim(pt, a)
    b = _lz_trim(pt, b)
    while b:
        b = _lz_monic(pt, b)
        a, b = b, _lz_trim(pt, _lz_rem(pt, a, b))
    return _lz_monic(pt, a) if a else a


def lift_roots(pt: FiberPoint, F, lo, hi, half_open: bool = False) -> list:
    """Distinct real roots of ``F(alpha, beta, z)`` in ``[lo, hi]`` as
    :class:`LiftedRoot` objects sharing ``pt``.

    Raises :class:`ZeroLevelPolynomial` when ``F`` vanishes identically on
    the fibre (a vertical line lies on ``F = 0``).
    """
    raw = _raw(F)
    lo, hi = Q(lo), Q(hi)
    if pt.is_rational():
        uni = raw.subs({"x": pt.alpha.lo, "y": pt.lo})
        cs = [_ZERO] * (uni.degrees()[2] + 1 if not uni.is_zero() else 1)
        for m, c in zip(uni.monoms(), uni.coeffs()):
            cs[int(m[2])] = c
        u = fmpq_poly(cs)
        if u.is_zero():
            raise ZeroLevelPolynomial("the fibre polynomial vanishes identically")
        if u.degree() <= 0:
            return []
        u = _squarefree(u)
        u = u / u.leading_coefficient()
        t = [[fmpq_poly([c])] if c != 0 else [] for c in u.coeffs()]
        return [LiftedRoot(pt, t, a, b, u) for a, b in isolate_real_roots(u, lo, hi, half_open)]
    t = _lz_trim(pt, _lz_from_mpoly(pt, raw))
    if not t:
        raise ZeroLevelPolynomial("the fibre polynomial vanishes identically")
    if len(t) == 1:
        return []
    dt = [pt.reduce([c * k for c in t[k]]) for k in range(1, len(t))]
    g = _lz_gcd(pt, t, dt)
    t = _lz_monic(pt, t)
    if len(g) > 1:
        t = _lz_quo(pt, t, g)
    T = _lz_to_mpoly(t)
    Tz = T.derivative(2)

    def box3(a, b):
        bb = pt.box
        return Box([bb[0], bb[1], Interval(a, b)])

    def excl(a, b):
        return box_eval(T, box3(a, b)).excludes_zero()

    def mono(a, b):
        return box_eval(Tz, box3(a, b)).excludes_zero()

    def sign_at(z0):
        return _sign_lz_at(pt, t, z0)

    def refine_base():
        if pt.is_rational():
            return False
        if pt.alpha.width >= pt.hi - pt.lo and not pt.alpha.is_rational():
            pt.alpha.refine_once()
        else:
            pt.refine_once()
        return True

    ivs = _isolate_bisect(lo, hi, excl, mono, sign_at, refine_base,
                          lambda: max(pt.alpha.width, pt.hi - pt.lo), half_open)
    return [LiftedRoot(pt, t, a, b) for a, b in ivs]


# ---------------------------------------------------------------------------
# public triangular-system interface
# ---------------------------------------------------------------------------

class AlgebraicPoint:
    """A real solution of a triangular system with a rational isolation box.

    ``system`` is the defining triangular system actually used (it may be a
    square-free or factor-reduced form of the input system); ``box`` contains
    exactly one of its real solutions.
    """

    __slots__ = ("_lvl",)

    def __init__(self, level):
        self._lvl = level

    @property
    def dimension(self) -> int:
        if isinstance(self._lvl, RealAlgebraic):
            return 1
        if isinstance(self._lvl, FiberPoint):
            return 2
        return 3

    @property
    def box(self) -> Box:
        if isinstance(self._lvl, RealAlgebraic):
            return Box([self._lvl.interval])
        return self._lvl.box

    @property
    def system(self) -> tuple:
        if isinstance(self._lvl, RealAlgebraic):
            return (Polynomial(fmpq_poly_to_mpoly(self._lvl.poly)),)
        return self._lvl.system()

    @property
    def level(self):
        """The underlying :class:`RealAlgebraic`, :class:`FiberPoint` or
        :class:`LiftedRoot`."""
        return self._lvl

    def refine(self, eps) -> "AlgebraicPoint":
        lvl = self._lvl.copy()
        lvl.refine(eps)
        return AlgebraicPoint(lvl)

    def midpoint(self) -> tuple:
        return self.box.mid

    def __repr__(self):
        return f"AlgebraicPoint({self.box!r})"


def _level_poly(eq, level: int):
    raw = _raw(eq)
    if raw.is_zero():
        raise ZeroLevelPolynomial(f"equation {level + 1} is zero")
    degs = raw.degrees()
    if any(degs[i] > 0 for i in range(level + 1, 3)):
        raise DimensionMismatch(f"equation {level + 1} involves later variables")
    if degs[level] <= 0:
        raise ZeroLevelPolynomial(
            f"equation {level + 1} does not involve {'xyz'[level]}")
    return raw


def root_isolate(system: Sequence, B, eps, half_open: bool = True) -> list:
    """Isolation boxes of all real solutions of a triangular system in ``B``,
    each of length ``< eps``, pairwise disjoint.

    Boundary convention: a solution with some coordinate equal to the upper
    end of ``B`` in that coordinate is excluded; lower ends are included
    (pass ``half_open=False`` for closed boxes).

    >>> root_isolate(["x^2 + 1"], Box.from_pairs([(-10, 10)]), 1)
    []
    """
    B = as_box(B)
    eps = Q(eps)
    if len(system) != len(B):
        raise DimensionMismatch("system length and box dimension differ")
    if not 1 <= len(system) <= 3:
        raise DimensionMismatch("systems have 1 to 3 equations")
    eqs = [_level_poly(e, i) for i, e in enumerate(system)]
    xs = real_roots(upoly(eqs[0]), B[0].lo, B[0].hi, half_open)
    pts = []
    for a in xs:
        if len(eqs) == 1:
            pts.append(a.refine(eps))
            continue
        for fp in fiber_roots(a, eqs[1], B[1].lo, B[1].hi, half_open):
            if len(eqs) == 2:
                pts.append(fp)
                continue
            pts.extend(lift_roots(fp.copy(), eqs[2], B[2].lo, B[2].hi, half_open))
    out = []
    for p in pts:
        p.refine(eps)
        out.append(AlgebraicPoint(p))
    # siblings share isolating data; copies keep later refinements independent
    return [AlgebraicPoint(p.level.copy()) for p in out]


def refine(point: AlgebraicPoint, eps) -> AlgebraicPoint:
    """Same root, box nested in the old one and of length ``< eps``."""
    return point.refine(eps)
