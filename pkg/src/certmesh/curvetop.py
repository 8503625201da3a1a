"""Isotopic topology graphs of plane algebraic curves in a box.

The curve ``g(x, y) = 0`` is split as ``g = V(x) g_v(x, y)`` where ``V``
collects the factors in ``x`` only (vertical lines).  Critical columns are
the real roots, inside ``[X1, X2]``, of

``H(x) V(x)``  with  ``H = (x - X1)(x - X2) g_v(x, Y1) g_v(x, Y2) Res(g_v, g_v_y, y)``,

so every x-critical point, every boundary crossing and every vertical line
sits on a column.  Each point on a column receives a *segregating box*
``[a, b] x [c, d]`` whose top and bottom edges are certified curve-free by the
box operation; the branch numbers of the point are then the numbers of
roots of ``g_v(a, y)`` and ``g_v(b, y)`` in ``(c, d)``.  Between consecutive
critical columns an auxiliary column at ``x = (b_i + a_{i+1}) / 2`` holds
only regular points, and edges join the ``k``-th right branch of the left
column, the ``k``-th auxiliary point and the ``k``-th left branch of the right
column.

A boundary point ``(alpha, Y1)`` on the curve keeps ``c = Y1``; its column
interval isolates ``alpha`` among the roots of ``g_v(x, Y1)``, which replaces
the bottom certificate.

The extended graph adds the box boundary, one auxiliary point between any
two vertically consecutive points of a column, and a triangulation of every
strip between adjacent columns.  Each region between consecutive
non-vertical edges of a strip is fanned from the auxiliary point of the
auxiliary column, so every cell, and every edge not already in the graph,
has an off-curve or regular vertex.

Examples
========

>>> from certmesh.curvetop import curve_topology
>>> from certmesh.interval import Box
>>> G = curve_topology("16*x^2 + 16*y^2 - 49", Box.from_pairs([(-2, 2), (-2, 2)]), "1/4")
>>> G.num_components(), G.num_cycles()
(1, 1)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from flint import fmpq, fmpq_poly

from .errors import (BoundaryContactUnresolved, DimensionMismatch,
                     InternalInvariantViolation, NotSquareFree,
                     SegregationFailed, ZeroPolynomial)
from .interval import Box, Interval, as_box, excludes_zero
from .ratpoly import (Polynomial, Q, resultant, split_content,
                      square_free_part)
from .render import (SCHEMA_VERSION, dump_json, shortest_decimal, svg_circle, svg_open,
                     svg_path, svg_rect)
from .rootiso import (AlgebraicPoint, FiberPoint, RealAlgebraic,
                      fiber_roots, isolate_real_roots, real_roots, upoly)

__all__ = [
    "GraphPoint", "Column", "TopologyGraph", "ExtendedTopologyGraph",
    "BranchCounts", "segregate_point_2d", "branch_numbers",
    "curve_topology", "extend_topology_graph", "ypoly", "check_curve",
]

#: refinement rounds allowed while segregating one column
_SEG_CAP = 300


def ypoly(P, x0) -> fmpq_poly:
    """``P(x0, y)`` as a univariate polynomial in ``y`` (``x0`` rational)."""
    raw = Polynomial(P).subs({"x": Q(x0)}).raw
    if raw.is_zero():
        return fmpq_poly(0)
    d = raw.degrees()[1]
    cs = [fmpq(0)] * (d + 1)
    for m, c in zip(raw.monoms(), raw.coeffs()):
        cs[int(m[1])] = c
    return fmpq_poly(cs)


def check_curve(g) -> Polynomial:
    """Validate a curve polynomial: nonzero, in ``x, y`` only, square-free."""
    g = Polynomial(g)
    if g.is_zero():
        raise ZeroPolynomial("the curve polynomial is zero")
    if g.degree("z") > 0:
        raise DimensionMismatch("a plane curve must not involve z")
    _, facs = g.raw.factor_squarefree()
    if any(m > 1 for _, m in facs):
        raise NotSquareFree("the curve polynomial is not square-free")
    return g


# ---------------------------------------------------------------------------
# data
# ---------------------------------------------------------------------------

@dataclass
class GraphPoint:
    """A vertex of a topology graph.

    ``kind`` is ``"curve"`` for points on the curve (including points of
    vertical lines), ``"boundary"`` for the box-boundary points of a column
    that are off the curve, and ``"auxiliary"`` for the separating points
    between consecutive points of a column.  ``on_gv`` marks points on the
    non-vertical part ``g_v = 0``; only those carry branch numbers.
    """

    index: int
    column: int
    fiber: FiberPoint
    y_lo: fmpq
    y_hi: fmpq
    kind: str
    on_gv: bool = False
    left: int = 0
    right: int = 0
    box: Box | None = None
    position: tuple = ()
    regular: bool = False

    @property
    def algebraic(self) -> AlgebraicPoint:
        return AlgebraicPoint(self.fiber)

    @property
    def on_curve(self) -> bool:
        return self.kind == "curve"

    def y_exact(self):
        """The y-coordinate when it is rational, else ``None``."""
        return self.fiber.lo if self.fiber.lo == self.fiber.hi else None


@dataclass
class Column:
    """All graph points sharing one x-coordinate ``alpha``.

    ``[a, b]`` is the common x-side of their segregating boxes.  Auxiliary
    columns (``critical=False``) have a rational ``alpha = a = b``.
    """

    index: int
    alpha: RealAlgebraic
    a: fmpq
    b: fmpq
    critical: bool
    vertical: bool = False
    points: list = field(default_factory=list)

    @property
    def x(self) -> fmpq:
        """Render x-coordinate: exact when rational, else the interval midpoint."""
        if self.alpha.is_rational():
            return self.alpha.lo
        return (self.a + self.b) / 2


@dataclass
class BranchCounts:
    """Left and right branch numbers per point index."""

    left: dict
    right: dict

    def __getitem__(self, i) -> tuple:
        return self.left[i], self.right[i]


@dataclass
class TopologyGraph:
    """Points grouped in columns, and edges tagged ``"non-vertical"`` or
    ``"x-vertical"``.  Edges are index pairs ``(i, j, kind)``; non-vertical
    edges go from left to right, x-vertical ones bottom-up."""

    curve: Polynomial
    box: Box
    eps: fmpq
    vertical_part: Polynomial
    reduced: Polynomial
    columns: list
    points: list
    edges: list
    meta: dict = field(default_factory=dict)

    # graph queries -------------------------------------------------------------
    def curve_points(self) -> list:
        return [p for p in self.points if p.kind == "curve"]

    def curve_edges(self) -> list:
        return [e for e in self.edges if e[2] in ("non-vertical", "x-vertical")]

    def branch_counts(self) -> BranchCounts:
        return BranchCounts({p.index: p.left for p in self.points},
                            {p.index: p.right for p in self.points})

    def _curve_graph(self) -> tuple:
        verts = {p.index for p in self.points if p.kind == "curve"}
        edges = [(i, j) for i, j, _ in self.curve_edges()]
        return verts, edges

    def num_components(self) -> int:
        """Connected components of the curve part of the graph."""
        verts, edges = self._curve_graph()
        parent = {v: v for v in verts}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for i, j in edges:
            parent[find(i)] = find(j)
        return len({find(v) for v in verts})

    def num_cycles(self) -> int:
        """Independent cycles ``E - V + C`` of the curve part."""
        verts, edges = self._curve_graph()
        return len(edges) - len(verts) + self.num_components()

    def check_branch_sums(self) -> bool:
        """For each gap between columns, the right branches of the left column
        equal the left branches of the right column."""
        for c0, c1 in zip(self.columns, self.columns[1:]):
            r = sum(self.points[i].right for i in c0.points)
            l = sum(self.points[i].left for i in c1.points)
            if r != l:
                return False
        return True

    def check_segregation(self) -> bool:
        """Re-assert the top and bottom certificates of every curve point box."""
        g = self.reduced
        Y1, Y2 = self.box[1].lo, self.box[1].hi
        for p in self.points:
            if not p.on_gv:
                continue
            col = self.columns[p.column]
            a, b = col.a, col.b
            for yv, edge in ((p.y_lo, Y1), (p.y_hi, Y2)):
                if yv == edge and p.y_exact() == edge:
                    continue
                if not excludes_zero(g, Box.from_pairs([(a, b), (yv, yv)])):
                    return False
        return True

    def check_planar(self) -> bool:
        """No two edges cross at render positions except at shared endpoints."""
        segs = [(self.points[i].position, self.points[j].position, i, j)
                for i, j, _ in self.edges]
        for k, (p, q, i, j) in enumerate(segs):
            for (r, s, u, v) in segs[k + 1:]:
                if len({i, j, u, v}) < 4:
                    continue
                if _segments_cross(p, q, r, s):
                    return False
        return True

    # output --------------------------------------------------------------------
    def _point_json(self, p: GraphPoint) -> dict:
        bx = p.box
        doc = {
            "index": p.index, "column": p.column, "kind": p.kind,
            "position": [shortest_decimal(p.position[0], bx[0].lo, bx[0].hi),
                         shortest_decimal(p.position[1], bx[1].lo, bx[1].hi)],
            "box": bx.to_json(),
        }
        if p.on_gv:
            doc["left"] = p.left
            doc["right"] = p.right
        return doc

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "type": "topology-graph",
            "curve": self.curve.expand_str(),
            "box": self.box.to_json(),
            "eps": str(self.eps),
            "points": [self._point_json(p) for p in self.points],
            "edges": [[i, j, k] for i, j, k in self.edges],
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return dump_json(self.to_dict())

    def to_svg(self, show_boxes: bool = False, width: int = 600) -> str:
        return _svg(self, show_boxes, width)


@dataclass
class ExtendedTopologyGraph(TopologyGraph):
    """A topology graph plus triangular cells covering the box.

    Every cell lists its auxiliary fan point first.  ``sectors[(u, v)]``
    says from where the non-curve edge ``(u, v)`` reaches the point ``u``:
    ``(side, gap)`` with ``side = +1`` for the right side of the box of ``u``
    and ``-1`` for the left side, ``gap`` being the number of branches of
    ``u`` on that side below the edge; ``(0, 1)`` and ``(0, -1)`` mean
    straight up or down the column.  ``branch_index[(u, v)]`` is
    ``(side, k)`` for the curve edge leaving ``u`` as its ``k``-th branch
    (bottom-up, from 0) on that side, or ``(0, 1)`` / ``(0, -1)`` along a
    vertical line.  Points whose lift does not change along their curve
    edges (curve points of auxiliary columns, separators of vertical lines)
    are flagged ``regular``.
    """

    cells: list = field(default_factory=list)
    sectors: dict = field(default_factory=dict)
    branch_index: dict = field(default_factory=dict)

    def cell_area(self, cell) -> fmpq:
        (x0, y0), (x1, y1), (x2, y2) = (self.points[i].position for i in cell)
        return ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)) / 2

    def total_area(self) -> fmpq:
        return sum((abs(self.cell_area(c)) for c in self.cells), Q(0))

    def check_cells(self) -> bool:
        """Cells are nondegenerate, use graph edges, and exactly cover the box."""
        es = {frozenset((i, j)) for i, j, _ in self.edges}
        for c in self.cells:
            if self.cell_area(c) == 0:
                return False
            for u, v in ((c[0], c[1]), (c[1], c[2]), (c[2], c[0])):
                if frozenset((u, v)) not in es:
                    return False
        return self.total_area() == self.box.volume()

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["type"] = "extended-topology-graph"
        d["cells"] = [list(c) for c in self.cells]
        return d


def _orient(p, q, r) -> int:
    v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (v > 0) - (v < 0)


def _on_segment(p, q, r) -> bool:
    return min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and \
        min(p[1], q[1]) <= r[1] <= max(p[1], q[1])


def _segments_cross(p, q, r, s) -> bool:
    o1, o2, o3, o4 = _orient(p, q, r), _orient(p, q, s), _orient(r, s, p), _orient(r, s, q)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    if o1 == 0 and _on_segment(p, q, r):
        return True
    if o2 == 0 and _on_segment(p, q, s):
        return True
    if o3 == 0 and _on_segment(r, s, p):
        return True
    if o4 == 0 and _on_segment(r, s, q):
        return True
    return False


# ---------------------------------------------------------------------------
# single-point operations
# ---------------------------------------------------------------------------

def segregate_point_2d(g, point: AlgebraicPoint, cap: int = _SEG_CAP) -> AlgebraicPoint:
    """Shrink the x-side of the box of a curve point until its top and bottom
    edges are certified free of the curve and no other critical x-value of
    ``g`` lies in its x-range.

    ``g`` must have no factor in ``x`` alone.

    >>> from certmesh.rootiso import root_isolate
    >>> from certmesh.interval import Box
    >>> P = root_isolate(["x", "y^2 - x^2 - x^3"], Box.from_pairs([(-1, 1), (-1, 1)]), 1)[0]
    >>> S = segregate_point_2d("y^2 - x^2 - x^3", P)
    >>> excludes_zero("y^2 - x^2 - x^3", S.box.replace(1, (S.box[1].lo, S.box[1].lo)))
    True
    """
    g = Polynomial(g)
    lvl = point.level.copy()
    if not isinstance(lvl, FiberPoint):
        raise DimensionMismatch("segregate_point_2d expects a point in the plane")
    if lvl.lo == lvl.hi:
        # widen an exact y between the neighbouring roots on the fibre
        r = lvl.lo
        near = fiber_roots(lvl.alpha.copy(), g, r - 1, r + 1)
        below = max([q.hi for q in near if q.hi < r], default=r - 1)
        above = min([q.lo for q in near if q.lo > r], default=r + 1)
        c, d = _widen_exact(lambda t: lvl.alpha.sign_of(_eval_y(g, lvl.alpha, t)) != 0,
                            r, below, above, None)
    else:
        c, d = lvl.lo, lvl.hi
    crit = _critical_x(g)
    a, b = lvl.alpha.lo, lvl.alpha.hi
    if lvl.alpha.is_rational():
        a, b = a - 1, b + 1
    for _ in range(cap):
        ok = excludes_zero(g, Box.from_pairs([(a, b), (c, c)])) and \
            excludes_zero(g, Box.from_pairs([(a, b), (d, d)]))
        if ok and _only_root(crit, lvl.alpha, a, b):
            box = Box.from_pairs([(a, b), (c, d)])
            return _BoxedPoint(lvl, box)
        a, b = _shrink(lvl.alpha, a, b, None, None)
    raise SegregationFailed("could not certify a segregating box; is the point on the curve?")


class _BoxedPoint(AlgebraicPoint):
    """An algebraic point reporting a caller-chosen (segregating) box."""

    __slots__ = ("_box",)

    def __init__(self, level, box: Box):
        super().__init__(level)
        self._box = box

    @property
    def box(self) -> Box:
        return self._box


def _eval_y(g: Polynomial, alpha: RealAlgebraic, y0) -> fmpq_poly:
    return upoly(g.subs({"y": Q(y0)}))


def _critical_x(g: Polynomial) -> fmpq_poly:
    if g.degree("y") <= 0:
        return fmpq_poly([1])
    D = resultant(g, g.diff("y"), "y")
    return upoly(D) if not D.is_zero() else fmpq_poly([1])


def _only_root(p: fmpq_poly, alpha: RealAlgebraic, a, b) -> bool:
    if p.degree() <= 0:
        return True
    roots = isolate_real_roots(p, a, b)
    if not roots:
        return True
    if len(roots) > 1:
        return False
    return alpha.sign_of(p) == 0


def branch_numbers(g, points: Sequence) -> list:
    """``(L#, R#)`` for segregated points: the numbers of roots of
    ``g(a, y)`` and ``g(b, y)`` in ``(c, d)``.

    >>> from certmesh.rootiso import root_isolate
    >>> from certmesh.interval import Box
    >>> P = root_isolate(["x", "y^2 - x^3"], Box.from_pairs([(-1, 1), (-1, 1)]), 1)[0]
    >>> branch_numbers("y^2 - x^3", [segregate_point_2d("y^2 - x^3", P)])
    [(0, 2)]
    """
    g = Polynomial(g)
    out = []
    for P in points:
        (a, b), (c, d) = (P.box[0].lo, P.box[0].hi), (P.box[1].lo, P.box[1].hi)
        out.append((_count_open(ypoly(g, a), c, d), _count_open(ypoly(g, b), c, d)))
    return out


def _count_open(p: fmpq_poly, c, d) -> int:
    if p.is_zero():
        raise SegregationFailed("curve contains a vertical line at a box side")
    return sum(1 for lo, hi in isolate_real_roots(p, c, d) if c < lo or c < hi)


# ---------------------------------------------------------------------------
# column machinery
# ---------------------------------------------------------------------------

def _shrink(alpha: RealAlgebraic, a, b, X1, X2) -> tuple:
    """Halve the x-range ``[a, b]`` around ``alpha`` (a box side stays put)."""
    if alpha.is_rational():
        r = alpha.lo
        na = a if a == r else (a + r) / 2
        nb = b if b == r else (b + r) / 2
        return na, nb
    w = b - a
    while alpha.hi - alpha.lo > w / 2 and not alpha.is_rational():
        alpha.refine_once()
    if alpha.is_rational():
        r = alpha.lo
        return (a + r) / 2, (b + r) / 2
    return alpha.lo, alpha.hi


def _widen_exact(nonroot: Callable, r, lo_bound, hi_bound, eps) -> tuple:
    """An interval ``(c, d)`` around an exact root ``r`` with non-root
    endpoints, reaching at most a third of the way to each bound (a bound
    equal to ``r`` pins that endpoint) and at most ``eps / 2`` from ``r``."""
    def pick(bound):
        if bound == r:
            return r
        t = r + (bound - r) / 3
        if eps is not None and abs(t - r) > eps / 2:
            t = r + (eps / 2 if bound > r else -eps / 2)
        while not nonroot(t):
            t = (r + t) / 2
        return t
    return pick(lo_bound), pick(hi_bound)


class CurveAnalysis:
    """Critical columns, segregated points and branch numbers of a curve.

    ``extra_columns`` are additional univariate polynomials in ``x`` whose
    roots must become critical columns; ``vertical_hook(alpha)`` returns a
    polynomial in ``x, y`` (or ``None``) whose roots on a vertical line
    ``x = alpha`` must become points of that line.
    """

    def __init__(self, g, B2: Box, eps, extra_columns: Sequence = (),
                 vertical_hook: Callable | None = None):
        self.g = check_curve(g)
        B2 = as_box(B2)
        if len(B2) != 2:
            raise DimensionMismatch("a plane curve needs a 2-dimensional box")
        self.B2 = B2
        self.eps = Q(eps)
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        self.X1, self.X2 = B2[0].lo, B2[0].hi
        self.Y1, self.Y2 = B2[1].lo, B2[1].hi
        self.V, self.gv = split_content(self.g, ["x"])
        self.vertical_hook = vertical_hook
        self.columns: list = []
        self._column_poly(extra_columns)
        self._lift_columns()
        self._segregate()
        self._branches()
        self._mid_columns()

    # columns -----------------------------------------------------------------
    def _column_poly(self, extra):
        gv, Y1, Y2 = self.gv, self.Y1, self.Y2
        x = fmpq_poly([0, 1])
        factors = [x - self.X1, x - self.X2]
        for yb in (Y1, Y2):
            f = gv.subs({"y": yb})
            if f.is_zero():
                raise BoundaryContactUnresolved(
                    f"the curve contains the box edge y = {yb}; enlarge the box")
            if not f.is_constant():
                factors.append(upoly(f))
        if gv.degree("y") >= 1:
            D = resultant(gv, gv.diff("y"), "y")
            if not D.is_zero() and not D.is_constant():
                factors.append(upoly(D))
        if not self.V.is_constant():
            factors.append(upoly(self.V))
        for e in extra:
            e = upoly(e)
            if not e.is_zero() and e.degree() > 0:
                factors.append(e)
        H = fmpq_poly([1])
        for f in factors:
            H = H * f
        self.H = H
        roots = real_roots(H, self.X1, self.X2)
        Vp = upoly(self.V) if not self.V.is_constant() else None
        for k, al in enumerate(roots):
            vertical = Vp is not None and al.sign_of(Vp) == 0
            self.columns.append(Column(k, al, al.lo, al.hi, True, vertical))
        # rational columns get a symmetric range inside the gaps
        for k, col in enumerate(self.columns):
            if not col.alpha.is_rational():
                continue
            r = col.alpha.lo
            left = self.columns[k - 1].alpha.hi if k > 0 else None
            right = self.columns[k + 1].alpha.lo if k + 1 < len(self.columns) else None
            lo_b = r if r == self.X1 or left is None else left
            hi_b = r if r == self.X2 or right is None else right
            col.a, col.b = _widen_exact(lambda t: H(t) != 0, r, lo_b, hi_b, self.eps)
        for col in self.columns:
            while col.b - col.a > self.eps:
                col.a, col.b = _shrink(col.alpha, col.a, col.b, self.X1, self.X2)

    def _lift_columns(self):
        """Fibre points of every critical column, bottom-up."""
        gv = self.gv
        for col in self.columns:
            pts = []
            if gv.degree("y") >= 1:
                for fp in fiber_roots(col.alpha, gv, self.Y1, self.Y2):
                    pts.append([fp, True])
            if col.vertical:
                extra = [FiberPoint.rational_y(col.alpha, self.Y1),
                         FiberPoint.rational_y(col.alpha, self.Y2)]
                hook = self.vertical_hook(col.alpha) if self.vertical_hook else None
                if hook is not None:
                    for fp in fiber_roots(col.alpha, hook, self.Y1, self.Y2):
                        if fp.sign(Polynomial(f"(y - {self.Y1})*(y - {self.Y2})")) != 0:
                            extra.append(fp)
                for fp in extra:
                    # roots of g_v on this line are already present
                    if gv.degree("y") < 1 or fp.sign(gv) != 0:
                        pts.append([fp, False])
            pts = _sort_fibre(pts)
            col._fibre = pts

    def _segregate(self):
        eps = self.eps
        for col in self.columns:
            pts = col._fibre
            ivs = []
            for fp, on_gv in pts:
                fp.refine(eps)
                _clear_edges(fp, self.Y1, self.Y2)
                if fp.lo == fp.hi:
                    ivs.append(None)
                else:
                    ivs.append((fp.lo, fp.hi))
            # widen exact rational points between their neighbours
            for k, (fp, on_gv) in enumerate(pts):
                if ivs[k] is not None:
                    continue
                r = fp.lo
                below = self.Y1 if k == 0 else (pts[k - 1][0].hi)
                above = self.Y2 if k + 1 == len(pts) else (pts[k + 1][0].lo)
                if r == self.Y1:
                    below = r
                if r == self.Y2:
                    above = r
                if on_gv:
                    al = col.alpha
                    ivs[k] = _widen_exact(
                        lambda t: al.sign_of(_eval_y(self.gv, al, t)) != 0,
                        r, below, above, eps)
                else:
                    ivs[k] = (r, r)
            col._ivs = ivs
            for _ in range(_SEG_CAP):
                if self._column_segregated(col):
                    break
                col.a, col.b = _shrink(col.alpha, col.a, col.b, self.X1, self.X2)
            else:
                raise SegregationFailed(
                    f"no segregating boxes found on the column near x = {float(col.x):.6g}")

    def _column_segregated(self, col) -> bool:
        for (fp, on_gv), (c, d) in zip(col._fibre, col._ivs):
            if not on_gv:
                continue
            for yv in (c, d):
                if yv == fp.lo == fp.hi and yv in (self.Y1, self.Y2):
                    continue  # boundary point: alpha isolated on g_v(x, Y)
                if not excludes_zero(self.gv, Box.from_pairs([(col.a, col.b), (yv, yv)])):
                    return False
        return True

    def _branches(self):
        gv = self.gv
        for k, col in enumerate(self.columns):
            col._branches = []
            first, last = k == 0, k + 1 == len(self.columns)
            pa = ypoly(gv, col.a) if not first else None
            pb = ypoly(gv, col.b) if not last else None
            for (fp, on_gv), (c, d) in zip(col._fibre, col._ivs):
                if not on_gv:
                    col._branches.append((0, 0))
                    continue
                L = _count_open(pa, c, d) if pa is not None else 0
                R = _count_open(pb, c, d) if pb is not None else 0
                col._branches.append((L, R))
            # all crossings of the sides are accounted for
            for side, p, idx in ((col.a, pa, 0), (col.b, pb, 1)):
                if p is None or gv.degree("y") < 1:
                    continue
                total = len(isolate_real_roots(p, self.Y1, self.Y2))
                if total != sum(br[idx] for br in col._branches):
                    raise SegregationFailed(
                        f"branch count mismatch at x = {side}: {total} crossings")

    def _mid_columns(self):
        gv = self.gv
        self.mids = []
        for c0, c1 in zip(self.columns, self.columns[1:]):
            m = (c0.b + c1.a) / 2
            pts = []
            if gv.degree("y") >= 1:
                p = ypoly(gv, m)
                al = RealAlgebraic.rational(m)
                for lo, hi in isolate_real_roots(p, self.Y1, self.Y2):
                    if lo == hi:
                        fp = FiberPoint.rational_y(al, lo)
                    else:
                        sq = p.gcd(p.derivative())
                        sq = p // sq if sq.degree() > 0 else p
                        sq = sq / sq.leading_coefficient()
                        fp = FiberPoint(al, [fmpq_poly([c]) for c in sq.coeffs()], lo, hi)
                    fp.refine(self.eps)
                    _clear_edges(fp, self.Y1, self.Y2)
                    pts.append(fp)
            r = sum(br[1] for br in c0._branches)
            l = sum(br[0] for br in c1._branches)
            if not (r == l == len(pts)):
                raise InternalInvariantViolation(
                    f"branch sums disagree across a strip: {r}, {len(pts)}, {l}")
            if any(fp.lo in (self.Y1, self.Y2) and fp.lo == fp.hi for fp in pts):
                raise InternalInvariantViolation("auxiliary column meets the box boundary")
            ivs = []
            for k, fp in enumerate(pts):
                if fp.lo < fp.hi:
                    ivs.append((fp.lo, fp.hi))
                    continue
                below = pts[k - 1].hi if k else self.Y1
                above = pts[k + 1].lo if k + 1 < len(pts) else self.Y2
                ivs.append(_widen_exact(lambda t: p(t) != 0, fp.lo, below, above, self.eps))
            self.mids.append((m, pts, ivs))


def _clear_edges(fp: FiberPoint, Y1, Y2):
    """Refine an inexact fibre point until its interval avoids ``Y1`` and
    ``Y2``, so separators and boundary points stay distinct."""
    while fp.lo < fp.hi and (fp.lo == Y1 or fp.hi == Y2):
        fp.refine_once()


def _sort_fibre(pts: list) -> list:
    """Sort fibre points of one column by y, refining until disjoint."""
    changed = True
    while changed:
        changed = False
        pts.sort(key=lambda t: (t[0].lo, t[0].hi))
        for i in range(len(pts) - 1):
            A, B = pts[i][0], pts[i + 1][0]
            if A.hi >= B.lo:
                changed = True
                if A.hi - A.lo >= B.hi - B.lo:
                    A.refine_once()
                else:
                    B.refine_once()
                if A.lo == A.hi == B.lo == B.hi:
                    raise InternalInvariantViolation("duplicate column point")
    return pts


# ---------------------------------------------------------------------------
# graph assembly
# ---------------------------------------------------------------------------

def _assemble(ca: CurveAnalysis, extended: bool) -> TopologyGraph:
    points: list = []
    edges: list = []
    columns: list = []
    Y1, Y2 = ca.Y1, ca.Y2

    def add_point(col: Column, fp, ylo, yhi, kind, on_gv=False, L=0, R=0):
        p = GraphPoint(len(points), col.index, fp, ylo, yhi, kind, on_gv, L, R)
        points.append(p)
        col.points.append(p.index)
        return p

    def new_column(alpha, a, b, critical, vertical):
        col = Column(len(columns), alpha, a, b, critical, vertical)
        columns.append(col)
        return col

    mid_iter = iter(ca.mids)
    strips = []  # (left column, right column, [(i, j)] curve edges bottom-up)
    prev_right = None
    for k, src in enumerate(ca.columns):
        col = new_column(src.alpha, src.a, src.b, True, src.vertical)
        rows = []
        for (fp, on_gv), (c, d), (L, R) in zip(src._fibre, src._ivs, src._branches):
            rows.append((fp, c, d, "curve", on_gv, L, R))
        if extended:
            rows = _with_boundary(rows, src.alpha, Y1, Y2, vertical=src.vertical)
            rows = _with_separators(rows, src.alpha, vertical=src.vertical)
        for fp, c, d, kind, on_gv, L, R, *reg in rows:
            add_point(col, fp, c, d, kind, on_gv, L, R).regular = bool(reg) and kind == "curve"
        if prev_right is not None:
            # strip from the previous auxiliary column into this one
            mcol, qs = prev_right
            lefts = [i for i in col.points for _ in range(points[i].left)]
            strips.append((mcol, col, list(zip(qs, lefts))))
        if k + 1 < len(ca.columns):
            m, qpts, qivs = next(mid_iter)
            mal = RealAlgebraic.rational(m)
            mcol = new_column(mal, m, m, False, False)
            rights = [i for i in col.points for _ in range(points[i].right)]
            rows = [(fp, c, d, "curve", True, 1, 1) for fp, (c, d) in zip(qpts, qivs)]
            if extended:
                rows = _with_boundary(rows, mal, Y1, Y2, vertical=False)
                rows = _with_separators(rows, mal, vertical=False)
            qs = []
            for fp, c, d, kind, on_gv, L, R, *_ in rows:
                p = add_point(mcol, fp, c, d, kind, on_gv, L, R)
                if kind == "curve":
                    p.regular = True
                    qs.append(p.index)
            strips.append((col, mcol, list(zip(rights, qs))))
            prev_right = (mcol, qs)
    for left, right, pairs in strips:
        for i, j in pairs:
            edges.append((i, j, "non-vertical"))
    for col in columns:
        if col.vertical:
            for i, j in zip(col.points, col.points[1:]):
                edges.append((i, j, "x-vertical"))
    # boxes and render positions
    for p in points:
        col = columns[p.column]
        p.box = Box.from_pairs([(col.a, col.b), (p.y_lo, p.y_hi)])
        y = p.y_exact()
        p.position = (col.x, y if y is not None else (p.y_lo + p.y_hi) / 2)
    meta = {
        "critical_columns": sum(1 for c in columns if c.critical),
        "vertical_lines": sum(1 for c in columns if c.vertical),
        "vertical_line_points": "merged into their column and sorted by y",
    }
    common = dict(curve=ca.g, box=ca.B2, eps=ca.eps, vertical_part=ca.V,
                  reduced=ca.gv, columns=columns, points=points, meta=meta)
    if not extended:
        return TopologyGraph(edges=edges, **common)
    cells = []
    sectors: dict = {}
    branch_index: dict = {}
    for left, right, pairs in strips:
        _triangulate_strip(points, columns, left, right, pairs, edges, cells, sectors)
        side = 1 if left.critical else -1
        seen: dict = {}
        for i, j in pairs:
            u, v = (i, j) if left.critical else (j, i)
            k = seen.get(u, 0)
            seen[u] = k + 1
            branch_index[(u, v)] = (side, k)
    last = len(columns) - 1
    for col in columns:
        pairs = list(zip(col.points, col.points[1:]))
        for i, j in pairs:
            if col.vertical:
                branch_index[(i, j)] = (0, 1)
                branch_index[(j, i)] = (0, -1)
            else:
                edges.append((i, j, "column"))
                _column_sectors(points, col, i, j, last, sectors)
    for c0, c1 in zip(columns, columns[1:]):
        edges.append((c0.points[0], c1.points[0], "boundary"))
        edges.append((c0.points[-1], c1.points[-1], "boundary"))
        for u, v, top in ((c0.points[0], c1.points[0], False),
                          (c0.points[-1], c1.points[-1], True)):
            pu, pv = points[u], points[v]
            sectors[(u, v)] = (1, pu.right if top else 0)
            sectors[(v, u)] = (-1, pv.left if top else 0)
    edges = _dedupe(edges)
    return ExtendedTopologyGraph(edges=edges, cells=cells, sectors=sectors,
                                 branch_index=branch_index, **common)


def _column_sectors(points, col: Column, i: int, j: int, last: int, sectors: dict):
    """Sectors of the column edge from ``i`` up to ``j``."""
    if not col.critical:
        sectors[(i, j)] = (0, 1)
        sectors[(j, i)] = (0, -1)
        return
    side = 1 if col.index < last else -1
    pi, pj = points[i], points[j]
    sectors[(i, j)] = (side, pi.right if side > 0 else pi.left)
    sectors[(j, i)] = (side, 0)


def _dedupe(edges: list) -> list:
    seen = {}
    for i, j, k in edges:
        key = frozenset((i, j))
        if key in seen:
            # a curve edge may coincide with a boundary edge; keep the curve tag
            if seen[key][2] in ("boundary", "column", "auxiliary") and \
                    k in ("non-vertical", "x-vertical"):
                seen[key] = (i, j, k)
            continue
        seen[key] = (i, j, k)
    return list(seen.values())


def _with_boundary(rows: list, alpha, Y1, Y2, vertical: bool) -> list:
    """Add the points ``(alpha, Y1)`` and ``(alpha, Y2)`` when missing."""
    out = list(rows)
    if not out or not (out[0][0].lo == out[0][0].hi == Y1):
        out.insert(0, (FiberPoint.rational_y(alpha, Y1), Y1, Y1,
                       "curve" if vertical else "boundary", False, 0, 0))
    if not (out[-1][0].lo == out[-1][0].hi == Y2):
        out.append((FiberPoint.rational_y(alpha, Y2), Y2, Y2,
                    "curve" if vertical else "boundary", False, 0, 0))
    return out


def _with_separators(rows: list, alpha, vertical: bool) -> list:
    """Insert a rational separating point between consecutive rows."""
    out = [rows[0]]
    for r in rows[1:]:
        n = (out[-1][2] + r[1]) / 2
        out.append((FiberPoint.rational_y(alpha, n), n, n,
                    "curve" if vertical else "auxiliary", False, 0, 0, True))
        out.append(r)
    return out


def _triangulate_strip(points, columns, left: Column, right: Column, pairs,
                       edges: list, cells: list, sectors: dict):
    """Fan every region between consecutive non-vertical edges of a strip
    from the separating point on the auxiliary column."""
    side = 1 if left.critical else -1
    crit, aux = (left, right) if left.critical else (right, left)
    crit_pos = {i: k for k, i in enumerate(crit.points)}
    aux_pos = {i: k for k, i in enumerate(aux.points)}
    if left.critical:
        rungs = [(i, j) for i, j in pairs]          # (critical, auxiliary)
    else:
        rungs = [(j, i) for i, j in pairs]
    rungs = [(crit.points[0], aux.points[0])] + rungs + [(crit.points[-1], aux.points[-1])]
    for t, ((u0, v0), (u1, v1)) in enumerate(zip(rungs, rungs[1:])):
        ku0, ku1 = crit_pos[u0], crit_pos[u1]
        kv0, kv1 = aux_pos[v0], aux_pos[v1]
        if kv1 != kv0 + 2 or ku1 < ku0:
            raise InternalInvariantViolation("strip edges are not ordered")
        n = aux.points[kv0 + 1]
        chain = crit.points[ku0:ku1 + 1]
        fan = [(n, v0, chain[0])] + [(n, a, b) for a, b in zip(chain, chain[1:])] + \
              [(n, chain[-1], v1)]
        for c in fan:
            cells.append(c)
        # branches of each chain point lying below this region
        below: dict = {}
        for u, _ in rungs[1:t + 1]:
            below[u] = below.get(u, 0) + 1
        for u in chain:
            edges.append((n, u, "auxiliary"))
            sectors[(u, n)] = (side, below.get(u, 0))
    return cells


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def curve_topology(g, B2, eps) -> TopologyGraph:
    """Isotopic topology graph of ``g = 0`` in ``B2``; all point boxes have
    length at most ``eps``.

    >>> from certmesh.interval import Box
    >>> G = curve_topology("y^2 - x^2 - x^3", Box.from_pairs([(-2, 2), (-2, 2)]), "1/4")
    >>> sorted((p.left, p.right) for p in G.points if p.on_gv and p.left + p.right == 4)
    [(2, 2)]
    """
    return _assemble(CurveAnalysis(g, B2, eps), extended=False)


def extend_topology_graph(g, B2, eps, vertical_hook: Callable | None = None,
                          extra_columns: Sequence = ()) -> ExtendedTopologyGraph:
    """Topology graph plus a triangulation of ``B2`` into cells whose edges are
    graph edges.

    >>> from certmesh.interval import Box
    >>> E = extend_topology_graph("x^2 + y^2 + 1", Box.from_pairs([(-1, 1), (-1, 1)]), 1)
    >>> E.total_area(), len(E.curve_edges())
    (4, 0)
    """
    ca = CurveAnalysis(g, B2, eps, extra_columns=extra_columns, vertical_hook=vertical_hook)
    return _assemble(ca, extended=True)


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_EDGE_STYLE = {
    "non-vertical": "stroke:#1f4e9c;stroke-width:2",
    "x-vertical": "stroke:#1f4e9c;stroke-width:2",
    "boundary": "stroke:#999;stroke-width:0.5",
    "column": "stroke:#bbb;stroke-width:0.5",
    "auxiliary": "stroke:#ddd;stroke-width:0.5",
}


def _svg(G: TopologyGraph, show_boxes: bool, width: int) -> str:
    out = svg_open(G.box, width)
    if show_boxes:
        out.append('<g id="boxes">')
        for p in G.points:
            if p.on_gv:
                out.append(svg_rect(p.box, 'fill="none" stroke="#e39" stroke-width="0.5"'))
        out.append("</g>")
    out.append('<g id="edges">')
    for i, j, kind in G.edges:
        out.append(svg_path(G.points[i].position, G.points[j].position,
                            _EDGE_STYLE.get(kind, "stroke:black")))
    out.append("</g>")
    out.append('<g id="points" fill="#c00">')
    r = G.box.length / 200
    for p in G.points:
        if p.kind == "curve":
            out.append(svg_circle(p.position, r))
    out.append("</g></svg>")
    return "\n".join(out) + "\n"
