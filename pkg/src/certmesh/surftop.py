"""Isotopic topology polyhedra of algebraic surfaces in a box.

The surface ``f(x, y, z) = 0`` is studied in ``B3 = [X1, X2] x [Y1, Y2] x
[Z1, Z2]``.  Its projection curve is

``G = sqfree(D(x, y) f(x, y, Z1) f(x, y, Z2))``  with  ``D = Res(f, f_z, z)``,

so the number of distinct real roots of ``f(x, y, .)`` in ``[Z1, Z2]`` is
constant on each connected region of ``B2 \\ {G = 0}`` and on each arc of the
curve between critical points.  An extended topology graph of ``G`` gives a
triangulation of ``B2`` whose vertices are lifted to the distinct roots of
``f`` above them.

Over a vertex off the curve the lifted points are simply ordered by height,
and so are the sheets of the surface over every edge and cell touching
that vertex.  Over a vertex on the curve, sheets coming from different
directions merge.  Each such vertex receives a *3-D segregated box*: a 2-D
box around it, containing only its own curve branches, times disjoint
slabs ``[e_k, f_k]`` holding one lifted point each, with ``f`` certified
nonzero on the slab walls over the whole 2-D box.  A sheet reaching the
vertex from some direction is followed to a *witness* point of the 2-D box
on that side, and the slab holding its height there names the lifted point
it ends at.  Curve edges are handled the same way, the witness being where
the curve branch leaves the box.

The counts of sheets over every edge ending at each lifted point, and of
faces over every cell attached to each lifted edge, are recorded and their
sum identities re-checked.

Examples
========

>>> from certmesh.surftop import surface_topology
>>> T = surface_topology("x^2 + y^2 + z^2 - 1", "[-2,2]x[-2,2]x[-2,2]")
>>> T.euler_characteristic(), T.num_components(), T.is_closed()
(2, 1, True)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from flint import fmpq, fmpq_poly

from .curvetop import (CurveAnalysis, ExtendedTopologyGraph, _BoxedPoint,
                       _shrink, branch_numbers, extend_topology_graph,
                       segregate_point_2d, ypoly)
from .errors import (BoundaryContactUnresolved, DegenerateInZ,
                     DegenerateProjection, DimensionMismatch,
                     InternalInvariantViolation, NotSquareFree,
                     SegregationFailed, VerticalLineContained,
                     ZeroPolynomial)
from .interval import Box, Interval, as_box, excludes_zero
from .ratpoly import (CTX, Polynomial, Q, gcd, resultant, split_content,
                      square_free_part)
from .render import SCHEMA_VERSION, dump_json, shortest_decimal
from .rootiso import (AlgebraicPoint, FiberPoint, LiftedRoot, RealAlgebraic,
                      fiber_roots, isolate_real_roots, lift_roots, real_roots,
                      upoly)

__all__ = [
    "check_surface", "vertical_line_points", "projection_curve",
    "lift_and_segregate", "count_sccs", "count_tsp", "surface_topology",
    "TopologyPolyhedron", "LiftedPoint", "Site", "segregate_site",
    "lift_complex", "orient_faces", "slice_branch_counts",
]

#: shrink rounds allowed while segregating one point in 3-D
_SITE_CAP = 80
#: refinement rounds allowed while placing one root in a slab
_SLAB_CAP = 400


# ---------------------------------------------------------------------------
# input checks and the projection curve
# ---------------------------------------------------------------------------

def check_surface(f) -> Polynomial:
    """Validate a surface polynomial: nonzero, positive degree in ``z``,
    square-free."""
    f = Polynomial(f)
    if f.is_zero():
        raise ZeroPolynomial("the surface polynomial is zero")
    if f.degree("z") < 1:
        raise DegenerateInZ("the surface polynomial does not involve z")
    _, facs = f.raw.factor_squarefree()
    if any(m > 1 for _, m in facs):
        raise NotSquareFree("the surface polynomial is not square-free")
    return f


def vertical_line_points(f, B2) -> list:
    """Points ``(x, y)`` of the closed box ``B2`` above which ``f`` vanishes
    for every ``z``: the common real zeros of the coefficients of ``f`` in
    ``z``.  A whole curve of them is reported by one of its points.

    >>> pts = vertical_line_points("x^2*y^2 + y^2*z^2 + z^2*x^2 - 7/2*x*y*z",
    ...                            Box.from_pairs([(-2, 2), (-2, 2)]))
    >>> [p.refine("1/8").box.contains((0, 0)) for p in pts]
    [True]
    >>> vertical_line_points("x^2 + y^2 + z^2 - 1", Box.from_pairs([(-2, 2), (-2, 2)]))
    []
    """
    f = Polynomial(f)
    B2 = as_box(B2)
    X1, X2 = B2[0].lo, B2[0].hi
    Y1, Y2 = B2[1].lo, B2[1].hi
    cs = [c for c in f.coefficients("z") if not c.is_zero()]
    g0 = cs[0]
    for c in cs[1:]:
        g0 = gcd(g0, c)
    if not g0.is_constant():
        pt = _curve_point(square_free_part(g0), B2)
        if pt is not None:
            return [pt]
    hs = [c.exact_div(g0) for c in cs]
    if any(h.is_constant() for h in hs):
        return []
    # common zeros of the cofactors project onto roots of a univariate gcd
    R = None
    for i, h in enumerate(hs):
        cands = []
        if h.degree("y") == 0:
            cands.append(upoly(h))
        else:
            for k in hs[i + 1:]:
                r = resultant(h, k, "y") if k.degree("y") > 0 else None
                if r is not None and not r.is_zero():
                    cands.append(upoly(r))
        for r in cands:
            R = r if R is None else R.gcd(r)
    if R is None or R.degree() <= 0:
        return []
    out = []
    for al in real_roots(R, X1, X2):
        base = next((h for h in hs if al.sign_of(_coeff_upolys(h)) != 0), None)
        if base is None:
            continue
        for fp in fiber_roots(al, base, Y1, Y2):
            if all(fp.sign(h) == 0 for h in hs):
                out.append(AlgebraicPoint(fp))
    return out


def _coeff_upolys(h: Polynomial) -> fmpq_poly:
    """A univariate polynomial in ``x`` vanishing where ``h(x, .)`` does
    identically: the gcd of the coefficients of ``h`` in ``y``."""
    out = None
    for c in h.coefficients("y"):
        if c.is_zero():
            continue
        u = upoly(c)
        out = u if out is None else out.gcd(u)
    return out if out is not None else fmpq_poly([0])


def _curve_point(g: Polynomial, B2: Box):
    """Some point of ``g = 0`` in the closed box, or ``None``."""
    try:
        ca = CurveAnalysis(g, B2, B2.length)
    except BoundaryContactUnresolved:
        return AlgebraicPoint(FiberPoint.rational_y(RealAlgebraic.rational(B2[0].lo),
                                                    B2[1].lo))
    for col in ca.columns:
        for fp, _ in col._fibre:
            return AlgebraicPoint(fp)
    return None


@dataclass
class _Projection:
    f: Polynomial
    G: Polynomial
    B3: Box


def _projection(f, B3) -> _Projection:
    B3 = as_box(B3)
    if len(B3) != 3:
        raise DimensionMismatch("a surface needs a 3-dimensional box")
    f = check_surface(f)
    B2 = Box(B3.dims[:2])
    pts = vertical_line_points(f, B2)
    if pts:
        x, y = (float(v) for v in pts[0].box.mid)
        raise VerticalLineContained(
            f"the surface contains the vertical line through ({x:.6g}, {y:.6g})")
    # a content in x, y has no real zero in the box now and can be dropped
    _, f = split_content(f, ["x", "y"])
    Z1, Z2 = B3[2].lo, B3[2].hi
    G = resultant(f, f.diff("z"), "z")
    for Z in (Z1, Z2):
        s = f.subs({"z": Z})
        if s.is_zero():
            raise BoundaryContactUnresolved(
                f"the surface contains the plane z = {Z}; enlarge the box")
        G = G * s
    return _Projection(f, square_free_part(G), B3)


def projection_curve(f, B3) -> Polynomial:
    """``sqfree(Res(f, f_z, z) f(x, y, Z1) f(x, y, Z2))`` after checking that
    no vertical line lies on the surface inside the box.

    >>> print(projection_curve("x^2 + y^2 + z^2 - 1", "[-2,2]x[-2,2]x[-2,2]"))
    x^4 + 2*x^2*y^2 + 2*x^2 + y^4 + 2*y^2 - 3
    """
    return _projection(f, B3).G


def _vertical_hook(f: Polynomial, Z1, Z2) -> Callable:
    """Points of a vertical line ``x = alpha`` of the projection curve where
    the roots of ``f(alpha, y, .)`` in ``[Z1, Z2]`` change: the discriminant
    of the slice and its boundary values."""

    def hook(alpha: RealAlgebraic):
        if not alpha.is_rational():
            raise DegenerateProjection(
                "the projection curve contains a vertical line at an irrational "
                f"abscissa near x = {float(alpha):.6g}")
        s = square_free_part(f.subs({"x": alpha.lo}))
        if s.degree("z") < 1:
            return s
        H = resultant(s, s.diff("z"), "z")
        for Z in (Z1, Z2):
            t = s.subs({"z": Z})
            if not t.is_zero():
                H = H * t
        return H

    return hook


# ---------------------------------------------------------------------------
# 3-D segregation of points on the projection curve
# ---------------------------------------------------------------------------

def _slab_walls(roots: list, Z1, Z2, hmax=None) -> list:
    """Disjoint slabs ``(e_k, f_k)``, one around each root.  Walls sit in the
    gaps between root intervals; a root exactly on ``Z1`` or ``Z2`` gets that
    plane as its wall.  With ``hmax`` each slab is at most that high."""
    out = []
    n = len(roots)
    for k, r in enumerate(roots):
        below = Z1 if k == 0 else roots[k - 1].hi
        above = Z2 if k + 1 == n else roots[k + 1].lo
        if r.lo == r.hi == Z1:
            e = Z1
        else:
            e = (below + r.lo) / 2
        if r.lo == r.hi == Z2:
            f_ = Z2
        else:
            f_ = (r.hi + above) / 2
        if hmax is not None:
            pad = (hmax - (r.hi - r.lo)) / 2
            if e != Z1 or r.lo != Z1:
                e = max(e, r.lo - pad)
            if f_ != Z2 or r.hi != Z2:
                f_ = min(f_, r.hi + pad)
        out.append((e, f_))
    return out


class Site:
    """A point ``P`` of the projection curve with a 3-D segregated box.

    ``box2`` is the 2-D box around ``P`` (possibly flat); ``roots`` are the
    distinct roots of ``f(P, z)`` in ``[Z1, Z2]`` bottom-up, and
    ``slabs[k] = (e_k, f_k)`` holds ``roots[k]``; ``f`` has no zero on
    ``box2 x {e_k}`` or ``box2 x {f_k}`` unless that wall is ``Z1`` or ``Z2``
    and the root lies on it.
    """

    def __init__(self, f: Polynomial, fp: FiberPoint, box2: Box, roots: list,
                 slabs: list, Z1, Z2):
        self.f = f
        self.fp = fp
        self.box2 = box2
        self.roots = roots
        self.slabs = slabs
        self.Z1, self.Z2 = Z1, Z2

    def boxes(self) -> list:
        return [Box(list(self.box2.dims) + [Interval(e, f_)]) for e, f_ in self.slabs]

    def pinned(self, k: int, upper: bool) -> bool:
        r = self.roots[k]
        if upper:
            return r.lo == r.hi == self.Z2 and self.slabs[k][1] == self.Z2
        return r.lo == r.hi == self.Z1 and self.slabs[k][0] == self.Z1

    def certified(self) -> bool:
        """Re-check every slab wall with the box operation."""
        for k, (e, f_) in enumerate(self.slabs):
            for w, up in ((e, False), (f_, True)):
                if self.pinned(k, up):
                    continue
                if not excludes_zero(self.f, Box(list(self.box2.dims) + [Interval(w)])):
                    return False
        return True

    def slab_of(self, root: LiftedRoot) -> int:
        """Index of the slab holding ``root`` (a root of ``f`` over a point of
        ``box2``)."""
        for _ in range(_SLAB_CAP):
            for k, (e, f_) in enumerate(self.slabs):
                if e <= root.lo and root.hi <= f_:
                    return k
            if all(root.hi < e or f_ < root.lo for e, f_ in self.slabs) and \
                    not any(root.lo < e < root.hi or root.lo < f_ < root.hi
                            for e, f_ in self.slabs):
                raise InternalInvariantViolation(
                    "a sheet near a curve point lies outside every slab")
            root.refine_once()
        raise InternalInvariantViolation("could not place a root in a slab")


class _Region:
    """Shrinkable 2-D box around a point; subclasses add curve checks."""

    def box(self) -> Box:
        raise NotImplementedError

    def shrink(self):
        raise NotImplementedError

    def shrink_x(self):
        """Shrink across the column only (enough to re-certify a box whose
        walls are at non-roots)."""
        self.shrink()

    def ok2d(self) -> bool:
        return True


class _FreeRegion(_Region):
    """The box of an algebraic point, shrunk by refining the point."""

    def __init__(self, fp: FiberPoint, eps):
        self.fp = fp.copy()
        self.fp.refine(eps)
        self.fp.alpha.refine(eps)

    def box(self) -> Box:
        return self.fp.box

    def shrink(self):
        if not self.fp.alpha.is_rational():
            self.fp.alpha.refine_once()
        self.fp.refine_once()


def segregate_site(f: Polynomial, Z1, Z2, fp: FiberPoint, region: _Region,
                   hmax=None, cap: int = _SITE_CAP) -> Site:
    """Shrink ``region`` and refine the roots above ``fp`` until every slab
    wall is certified; see :class:`Site`."""
    roots = lift_roots(fp.copy(), f, Z1, Z2)
    if hmax is not None:
        for r in roots:
            r.refine(Q(hmax) / 2)
    for _ in range(cap):
        for _ in range(cap):
            if region.ok2d():
                break
            region.shrink_x()
        else:
            raise SegregationFailed("no 2-D segregating box for a lifted point")
        B2 = region.box()
        slabs = _slab_walls(roots, Z1, Z2, hmax)
        site = Site(f, fp, B2, roots, slabs, Z1, Z2)
        if site.certified():
            return site
        region.shrink()
        for r in roots:
            r.refine_once()
    raise SegregationFailed(
        f"no 3-D segregating box found above ({float(fp.alpha):.6g}, "
        f"{float((fp.lo + fp.hi) / 2):.6g})")


def lift_and_segregate(f, B3, P: AlgebraicPoint, eps) -> tuple:
    """Lift a 2-D point to the surface and segregate the lifts.

    Returns ``(lifted, P2)``: the 3-D points above ``P`` in ``B3`` bottom-up,
    each reporting a box ``B x [e_k, f_k]`` whose top and bottom faces are
    certified free of the surface, and ``P`` with its new 2-D box ``B``.

    >>> from certmesh.rootiso import root_isolate
    >>> P = root_isolate(["x", "y"], Box.from_pairs([(-1, 1), (-1, 1)]), 1)[0]
    >>> lifted, P2 = lift_and_segregate("x^2 + y^2 + z^2 - 1", "[-2,2]x[-2,2]x[-2,2]", P, "1/4")
    >>> [str(p.box[2]) for p in lifted]
    ['Interval(-9/8, -7/8)', 'Interval(7/8, 9/8)']
    """
    f = check_surface(f)
    B3 = as_box(B3)
    Z1, Z2 = B3[2].lo, B3[2].hi
    fp = P.level
    if not isinstance(fp, FiberPoint):
        raise DimensionMismatch("lift_and_segregate expects a 2-D point")
    eps = Q(eps)
    region = _FreeRegion(fp, eps)
    site = segregate_site(f, Z1, Z2, fp, region, hmax=eps)
    lifted = [_BoxedPoint(r, b) for r, b in zip(site.roots, site.boxes())]
    return lifted, _BoxedPoint(region.fp, site.box2)


class _GraphRegion(_Region):
    """2-D box around a point of an extended topology graph, kept so that
    the curve inside it consists of the point's own branches."""

    def __init__(self, E: ExtendedTopologyGraph, i: int):
        p = E.points[i]
        col = E.columns[p.column]
        self.gv = E.reduced
        self.X1, self.X2 = E.box[0].lo, E.box[0].hi
        Y1, Y2 = E.box[1].lo, E.box[1].hi
        self.alpha = col.alpha.copy()
        self.a, self.b = col.a, col.b
        self.flat = not col.critical
        self.L, self.R = p.left, p.right
        fp = p.fiber
        self.fp = None if fp.lo == fp.hi else fp.copy()
        self.r = fp.lo if fp.lo == fp.hi else None
        c, d = p.y_lo, p.y_hi
        if c == d:
            k = col.points.index(i)
            if c > Y1:
                c = (E.points[col.points[k - 1]].y_hi + c) / 2
            if d < Y2:
                d = (d + E.points[col.points[k + 1]].y_lo) / 2
        self.c, self.d = c, d
        self.pin_lo = self.r is not None and self.r == Y1
        self.pin_hi = self.r is not None and self.r == Y2
        self.has_left = not (self.alpha.is_rational() and self.a == self.alpha.lo)
        self.has_right = not (self.alpha.is_rational() and self.b == self.alpha.lo)
        self._cross = {}

    def box(self) -> Box:
        return Box.from_pairs([(self.a, self.b), (self.c, self.d)])

    def shrink_x(self):
        self._cross = {}
        if not self.flat:
            self.a, self.b = _shrink(self.alpha, self.a, self.b, self.X1, self.X2)

    def shrink(self):
        self.shrink_x()
        if self.r is not None:
            if not self.pin_lo:
                self.c = (self.c + self.r) / 2
            if not self.pin_hi:
                self.d = (self.d + self.r) / 2
            return
        self.fp.refine_once()
        if self.fp.lo == self.fp.hi:
            self.r = self.fp.lo
        else:
            self.c, self.d = self.fp.lo, self.fp.hi

    def ok2d(self) -> bool:
        if self.flat:
            return True
        gv = self.gv
        for yv, pinned in ((self.c, self.pin_lo), (self.d, self.pin_hi)):
            if not pinned and not excludes_zero(gv, Box.from_pairs([(self.a, self.b),
                                                                   (yv, yv)])):
                return False
        if self.has_left and len(self.crossings(-1)) != self.L:
            return False
        if self.has_right and len(self.crossings(1)) != self.R:
            return False
        return True

    # witnesses --------------------------------------------------------------
    def side_x(self, side: int) -> fmpq:
        return self.b if side > 0 else self.a

    def crossings(self, side: int) -> list:
        """Isolating intervals of the curve on the side ``x = a`` or ``b``
        within ``[c, d]``, bottom-up."""
        if side not in self._cross:
            p = ypoly(self.gv, self.side_x(side))
            if p.degree() <= 0:
                self._cross[side] = []
            else:
                self._cross[side] = [(lo, hi) for lo, hi in
                                     isolate_real_roots(p, self.c, self.d)
                                     if self.c < hi and lo < self.d]
        return self._cross[side]

    def gap_point(self, side: int, j: int) -> FiberPoint:
        ys = self.crossings(side)
        lower = self.c if j == 0 else ys[j - 1][1]
        upper = self.d if j == len(ys) else ys[j][0]
        return _rational_point(self.side_x(side), (lower + upper) / 2)

    def crossing_point(self, side: int, k: int) -> FiberPoint:
        lo, hi = self.crossings(side)[k]
        s = self.side_x(side)
        if lo == hi:
            return _rational_point(s, lo)
        return _fibre_over_rational(s, ypoly(self.gv, s), lo, hi)

    def vertical_point(self, up: int) -> FiberPoint:
        x = self.a if self.flat else self.alpha.lo
        return _rational_point(x, self.d if up > 0 else self.c)


def _rational_point(x, y) -> FiberPoint:
    return FiberPoint.rational_y(RealAlgebraic.rational(x), y)


def _fibre_over_rational(x, p: fmpq_poly, lo, hi) -> FiberPoint:
    """The root of ``p`` isolated in ``(lo, hi)``, above the rational ``x``."""
    sq = p.gcd(p.derivative())
    sq = p // sq if sq.degree() > 0 else p
    sq = sq / sq.leading_coefficient()
    return FiberPoint(RealAlgebraic.rational(x), [fmpq_poly([c]) for c in sq.coeffs()],
                      lo, hi)


# ---------------------------------------------------------------------------
# lifting a triangulated complex
# ---------------------------------------------------------------------------

@dataclass
class LiftedPoint:
    """A point of the surface above vertex ``vertex`` of the planar complex;
    ``rank`` is its position among the lifts of that vertex, bottom-up."""

    index: int
    vertex: int
    rank: int
    root: LiftedRoot
    box: Box
    position: tuple = ()

    @property
    def algebraic(self) -> AlgebraicPoint:
        return _BoxedPoint(self.root, self.box)


@dataclass
class _Lift:
    points: list
    by_vertex: list
    edges: list              # (i, j, edge2d, sheet)
    faces: list              # (i, j, k, cell, (e1, e2, e3))
    sheets: dict             # edge2d -> number of sheets
    maps: dict               # (vertex, edge2d) -> tuple of lifted point ranks
    cell_sheets: dict        # cell -> number of sheets


def lift_complex(f: Polynomial, Z1, Z2, fibres: list, sites: list, regular: list,
                 edges: list, cells: list, witness: Callable) -> _Lift:
    """Lift a triangulated planar complex to the surface.

    ``fibres[v]`` is the planar point of vertex ``v``; ``sites[v]`` is a
    :class:`Site` for vertices on the projection curve and ``None`` for the
    others.  ``edges`` are ``(u, v, curve)`` triples and ``cells`` vertex
    triples with an off-curve vertex first.  ``witness(u, v)`` returns a
    planar point of the site box of ``u`` reached by the edge ``(u, v)``;
    it is not called for curve edges at ``regular`` vertices, where the
    lifted points continue unchanged along the curve.
    """
    nv = len(fibres)
    roots = []
    for v in range(nv):
        if sites[v] is not None:
            roots.append(sites[v].roots)
        else:
            roots.append(lift_roots(fibres[v].copy(), f, Z1, Z2))
    points = []
    by_vertex = []
    for v in range(nv):
        ids = []
        for k, r in enumerate(roots[v]):
            box = sites[v].boxes()[k] if sites[v] is not None else r.box
            ids.append(len(points))
            points.append(LiftedPoint(len(points), v, k, r, box))
        by_vertex.append(ids)

    def ranks_at(u, other):
        site = sites[u]
        W = witness(u, other)
        return tuple(site.slab_of(r) for r in lift_roots(W, f, Z1, Z2))

    edge_id = {}
    maps = {}
    sheets = {}
    out_edges = []
    for e, (u, v, curve) in enumerate(edges):
        edge_id[frozenset((u, v))] = e
        ends = {}
        for w, o in ((u, v), (v, u)):
            if sites[w] is None or (curve and regular[w]):
                ends[w] = tuple(range(len(roots[w])))
            else:
                ends[w] = ranks_at(w, o)
        if len(ends[u]) != len(ends[v]):
            kind = "curve segments" if curve else "sheets"
            raise InternalInvariantViolation(
                f"edge {u}-{v}: {len(ends[u])} {kind} at one end, {len(ends[v])} at the other")
        sheets[e] = len(ends[u])
        maps[(u, e)] = ends[u]
        maps[(v, e)] = ends[v]
        seen = set()
        for s in range(sheets[e]):
            key = (ends[u][s], ends[v][s])
            if key in seen:
                raise InternalInvariantViolation(f"duplicate lifted edge over {u}-{v}")
            seen.add(key)
            out_edges.append((by_vertex[u][ends[u][s]], by_vertex[v][ends[v][s]], e, s))
    lifted_edge = {(e, s): k for k, (_, _, e, s) in enumerate(out_edges)}

    faces = []
    cell_sheets = {}
    for c, (n, a, b) in enumerate(cells):
        if sites[n] is not None:
            raise InternalInvariantViolation("a cell has no vertex off the projection curve")
        ea, eb, ab = (edge_id[frozenset(t)] for t in ((n, a), (n, b), (a, b)))
        cell_sheets[c] = len(roots[n])
        if sheets[ea] != len(roots[n]) or sheets[eb] != len(roots[n]):
            raise InternalInvariantViolation(f"cell {c}: sheet counts disagree")
        seen = set()
        for s in range(len(roots[n])):
            la = maps[(a, ea)][s]
            lb = maps[(b, eb)][s]
            cand = [t for t in range(sheets[ab])
                    if maps[(a, ab)][t] == la and maps[(b, ab)][t] == lb]
            if len(cand) != 1:
                raise InternalInvariantViolation(
                    f"cell {c}: sheet {s} closes on {len(cand)} lifted edges")
            tri = (by_vertex[n][s], by_vertex[a][la], by_vertex[b][lb])
            if tri in seen:
                raise InternalInvariantViolation(f"duplicate face over cell {c}")
            seen.add(tri)
            faces.append(tri + (c, (lifted_edge[(ea, s)], lifted_edge[(eb, s)],
                                    lifted_edge[(ab, cand[0])])))
    return _Lift(points, by_vertex, out_edges, faces, sheets, maps, cell_sheets)


def orient_faces(faces: list) -> list:
    """Reorder vertex triples so that faces sharing an edge traverse it in
    opposite directions wherever the surface is orientable (breadth-first
    over edges with exactly two faces)."""
    faces = [list(t) for t in faces]
    by_edge: dict = {}
    for k, t in enumerate(faces):
        for i in range(3):
            by_edge.setdefault(frozenset((t[i], t[(i + 1) % 3])), []).append(k)
    done = [False] * len(faces)

    def directed(t):
        return {(t[i], t[(i + 1) % 3]) for i in range(3)}

    for start in range(len(faces)):
        if done[start]:
            continue
        done[start] = True
        queue = [start]
        while queue:
            k = queue.pop()
            dk = directed(faces[k])
            for i in range(3):
                u, v = faces[k][i], faces[k][(i + 1) % 3]
                nb = by_edge[frozenset((u, v))]
                if len(nb) != 2:
                    continue
                j = nb[0] if nb[1] == k else nb[1]
                if done[j]:
                    continue
                if (u, v) in directed(faces[j]):
                    faces[j] = [faces[j][0], faces[j][2], faces[j][1]]
                done[j] = True
                queue.append(j)
            del dk
    return [tuple(t) for t in faces]


def slice_branch_counts(f, W: FiberPoint, Z1, Z2) -> list:
    """Branch numbers of the slice curve ``f(b, y, z) = 0`` (a curve in the
    ``(y, z)``-plane) at each root ``z`` of ``f(W, z)`` in ``[Z1, Z2]``, for
    a point ``W = (b, beta)`` with rational ``b``.

    Entry ``k`` is ``(below, above)``: the numbers of slice branches leaving
    the ``k``-th point towards smaller and larger ``y``, i.e. the numbers of
    surface patches attached to that curve segment on either side.  Roots
    on ``Z1`` or ``Z2`` get ``None`` since part of their slice lies outside
    the box.

    >>> W = FiberPoint.rational_y(RealAlgebraic.rational(0), 1)
    >>> slice_branch_counts("x^2 + y^2 + z^2 - 1", W, -2, 2)
    [(2, 0)]
    """
    f = Polynomial(f)
    if not W.alpha.is_rational():
        raise ValueError("slices are taken at a rational x")
    x, y, _ = CTX.gens()
    s = square_free_part(f.subs({"x": W.alpha.lo}))
    # the slice as a plane curve: y becomes the abscissa, z the ordinate
    s = Polynomial(s.raw.compose(x, x, y))
    _, s = split_content(s, ["x"])
    m = fmpq_poly([c.coeffs()[0] if not c.is_zero() else 0 for c in W.m])
    if W.lo == W.hi:
        beta = RealAlgebraic.rational(W.lo)
    else:
        beta = RealAlgebraic.roots_of(m, W.lo, W.hi)[0]
    out = []
    for fp in fiber_roots(beta, s, Z1, Z2):
        if fp.lo == fp.hi and fp.lo in (Q(Z1), Q(Z2)):
            out.append(None)
            continue
        P = segregate_point_2d(s, AlgebraicPoint(fp))
        out.append(tuple(branch_numbers(s, [P])[0]))
    return out


# ---------------------------------------------------------------------------
# the topology polyhedron
# ---------------------------------------------------------------------------

@dataclass
class TopologyPolyhedron:
    """Points, edges and triangular faces isotopic to the surface in ``box``.

    ``edges[k] = (i, j, e, s)``: the ``s``-th lifted segment over the planar
    edge ``e`` of ``graph``; ``faces[k] = (i, j, l, c, (E1, E2, E3))``: a
    face over cell ``c`` with its three lifted edges.  ``sccs[(i, e)]`` is
    the number of lifted segments over ``e`` ending at point ``i``;
    ``tsp[(E, c)]`` the number of faces over cell ``c`` bounded by lifted
    edge ``E``.  ``slice_tsp`` holds the same counts obtained independently,
    for segments over curve edges leaving a critical point, from branch
    numbers of slice curves (see :func:`slice_branch_counts`).
    """

    surface: Polynomial
    box: Box
    projection: Polynomial
    graph: ExtendedTopologyGraph
    points: list
    edges: list
    faces: list
    sheets: dict
    cell_sheets: dict
    sites: dict
    sccs: dict = field(default_factory=dict)
    tsp: dict = field(default_factory=dict)
    slice_tsp: dict = field(default_factory=dict)

    def __post_init__(self):
        for i, j, e, _ in self.edges:
            for p in (i, j):
                self.sccs[(p, e)] = self.sccs.get((p, e), 0) + 1
        for *_, c, tri in self.faces:
            for E in tri:
                self.tsp[(E, c)] = self.tsp.get((E, c), 0) + 1

    # invariants -------------------------------------------------------------
    def euler_characteristic(self) -> int:
        return len(self.points) - len(self.edges) + len(self.faces)

    def num_components(self) -> int:
        parent = list(range(len(self.points)))

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for i, j, *_ in self.edges:
            parent[find(i)] = find(j)
        return len({find(v) for v in range(len(self.points))})

    def edge_face_counts(self) -> dict:
        cnt = {k: 0 for k in range(len(self.edges))}
        for *_, tri in self.faces:
            for E in tri:
                cnt[E] += 1
        return cnt

    def is_closed(self) -> bool:
        """Every edge bounds exactly two faces."""
        return all(v == 2 for v in self.edge_face_counts().values())

    def check_sccs(self) -> bool:
        """For every planar edge, the segment counts summed over the lifted
        points of either endpoint agree."""
        for e, (u, v, _) in enumerate(self.graph_edges()):
            su = sum(self.sccs.get((p, e), 0) for p in self._lifts(u))
            sv = sum(self.sccs.get((p, e), 0) for p in self._lifts(v))
            if not su == sv == self.sheets[e]:
                return False
        return True

    def check_tsp(self) -> bool:
        """For every cell, the face counts summed over the lifted edges of
        each of its three sides agree."""
        sides: dict = {}
        for i, j, e, s in self.edges:
            sides.setdefault(e, []).append((i, j, e, s))
        ids = {(e, s): k for k, (_, _, e, s) in enumerate(self.edges)}
        cells = self.graph.cells
        emap = {frozenset((u, v)): e for e, (u, v, _) in enumerate(self.graph_edges())}
        for c, cell in enumerate(cells):
            sums = []
            for u, v in ((cell[0], cell[1]), (cell[0], cell[2]), (cell[1], cell[2])):
                e = emap[frozenset((u, v))]
                sums.append(sum(self.tsp.get((ids[(e, s)], c), 0)
                                for s in range(self.sheets[e])))
            if not sums[0] == sums[1] == sums[2] == self.cell_sheets[c]:
                return False
        return all(self.tsp.get(key, 0) == n for key, n in self.slice_tsp.items())

    def check_segregation(self) -> bool:
        return all(s.certified() for s in self.sites.values())

    def graph_edges(self) -> list:
        return [(i, j, k in ("non-vertical", "x-vertical")) for i, j, k in self.graph.edges]

    def _lifts(self, v: int) -> list:
        return [p.index for p in self.points if p.vertex == v]

    # output -----------------------------------------------------------------
    def to_obj(self) -> str:
        out = [f"# topology polyhedron of {self.surface}",
               f"# box {self.box}",
               f"# V {len(self.points)} E {len(self.edges)} F {len(self.faces)}"]
        for p in self.points:
            out.append("v " + " ".join(f"{float(c):.9g}" for c in p.position))
        in_face = set()
        for *_, tri in self.faces:
            in_face.update(tri)
        for t in orient_faces([fc[:3] for fc in self.faces]):
            out.append("f " + " ".join(str(i + 1) for i in t))
        for k, (i, j, *_) in enumerate(self.edges):
            if k not in in_face:
                out.append(f"l {i + 1} {j + 1}")
        return "\n".join(out) + "\n"

    def to_dict(self) -> dict:
        pts = []
        for p in self.points:
            pts.append({
                "index": p.index,
                "vertex": p.vertex,
                "rank": p.rank,
                "position": [shortest_decimal(c) for c in p.position],
                "box": p.box.to_json(),
                "system": [str(q) for q in p.root.system()],
            })
        return {
            "schema_version": SCHEMA_VERSION,
            "type": "topology-polyhedron",
            "surface": str(self.surface),
            "box": self.box.to_json(),
            "projection_curve": str(self.projection),
            "points": pts,
            "edges": [{"points": [i, j], "projection_edge": e, "sheet": s}
                      for i, j, e, s in self.edges],
            "faces": [{"points": [i, j, k], "cell": c, "edges": list(tri)}
                      for i, j, k, c, tri in self.faces],
            "sccs_counts": [[p, e, n] for (p, e), n in sorted(self.sccs.items())],
            "tsp_counts": [[E, c, n] for (E, c), n in sorted(self.tsp.items())],
            "euler_characteristic": self.euler_characteristic(),
            "components": self.num_components(),
            "closed": self.is_closed(),
        }

    def to_json(self) -> str:
        return dump_json(self.to_dict())


def count_sccs(T: TopologyPolyhedron, point: int, edge: int) -> int:
    """``#(P, e)``: lifted segments over planar edge ``edge`` ending at the
    lifted point ``point``."""
    return T.sccs.get((point, edge), 0)


def count_tsp(T: TopologyPolyhedron, lifted_edge: int, cell: int) -> int:
    """``#(E, c)``: faces over cell ``cell`` bounded by ``lifted_edge``.

    Over a curve edge leaving a critical point the count comes from slice
    branch numbers; elsewhere every segment bounds exactly one patch per
    adjacent cell, as recorded in the polyhedron.
    """
    key = (lifted_edge, cell)
    if key in T.slice_tsp:
        return T.slice_tsp[key]
    return T.tsp.get(key, 0)


def _render_z(root: LiftedRoot) -> fmpq:
    r = root.copy()
    r.refine(Q(1) / 1024)
    return (r.lo + r.hi) / 2


def surface_topology(f, B3, eps=None) -> TopologyPolyhedron:
    """Topology polyhedron of ``f = 0`` in ``B3``.

    ``eps`` bounds the planar boxes used for the projection curve (default:
    an eighth of the box).
    """
    proj = _projection(f, B3)
    f, G, B3 = proj.f, proj.G, proj.B3
    Z1, Z2 = B3[2].lo, B3[2].hi
    B2 = Box(B3.dims[:2])
    eps = Q(eps) if eps is not None else B2.length / 8
    E = extend_topology_graph(G, B2, eps, vertical_hook=_vertical_hook(f, Z1, Z2))
    n = len(E.points)
    fibres = [p.fiber for p in E.points]
    regions = {}
    sites: list = [None] * n
    for p in E.points:
        if p.on_curve:
            reg = _GraphRegion(E, p.index)
            regions[p.index] = reg
            sites[p.index] = segregate_site(f, Z1, Z2, p.fiber, reg)
    regular = [p.regular for p in E.points]

    def witness(u, v):
        reg = regions[u]
        if (u, v) in E.branch_index:
            side, k = E.branch_index[(u, v)]
            return reg.vertical_point(k) if side == 0 else reg.crossing_point(side, k)
        side, gap = E.sectors[(u, v)]
        return reg.vertical_point(gap) if side == 0 else reg.gap_point(side, gap)

    edges = [(i, j, k in ("non-vertical", "x-vertical")) for i, j, k in E.edges]
    lift = lift_complex(f, Z1, Z2, fibres, sites, regular, edges, E.cells, witness)
    for lp in lift.points:
        x, y = E.points[lp.vertex].position
        lp.position = (x, y, _render_z(lp.root))
    slice_tsp = _slice_tsp(f, Z1, Z2, E, lift, regular, witness)
    return TopologyPolyhedron(
        surface=f, box=B3, projection=G, graph=E, points=lift.points,
        edges=lift.edges, faces=lift.faces, sheets=lift.sheets,
        cell_sheets=lift.cell_sheets, slice_tsp=slice_tsp,
        sites={i: s for i, s in enumerate(sites) if s is not None})


def _slice_tsp(f, Z1, Z2, E: ExtendedTopologyGraph, lift: _Lift, regular: list,
               witness: Callable) -> dict:
    """Patch counts of the segments over every curve edge between a
    critical point and an auxiliary column, from slice branch numbers at
    the witness where the edge leaves the critical box."""
    ids = {(e, s): k for k, (_, _, e, s) in enumerate(lift.edges)}
    cells_of: dict = {}
    for c, cell in enumerate(E.cells):
        for a, b in ((cell[0], cell[1]), (cell[0], cell[2]), (cell[1], cell[2])):
            cells_of.setdefault(frozenset((a, b)), []).append(c)
    out = {}
    for e, (i, j, kind) in enumerate(E.edges):
        if kind != "non-vertical":
            continue
        u, q = (i, j) if not regular[i] else (j, i)
        if regular[u] or not regular[q]:
            continue
        counts = slice_branch_counts(f, witness(u, q), Z1, Z2)
        if len(counts) != lift.sheets[e]:
            raise InternalInvariantViolation("slice and lift disagree on segment counts")
        qy = E.points[q].y_lo
        for c in cells_of.get(frozenset((u, q)), []):
            above = E.points[E.cells[c][0]].y_lo > qy
            for s, bn in enumerate(counts):
                if bn is not None:
                    out[(ids[(e, s)], c)] = bn[1] if above else bn[0]
    return out
