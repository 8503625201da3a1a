"""Certified epsilon-meshes of plane curves.

The box is cut along the critical columns of a curve analysis.  In a
column every curve point ``P`` owns its segregating box ``S``; ``P`` is
joined to the places where its branches leave ``S`` through the left and
right sides (*stitching*).  The strips between columns contain no
x-critical and no y-extremal point.  They are subdivided into *nice* boxes
of size at most ``eps``.  A box is nice when the curve misses it, or when
one partial derivative keeps its sign on it and the curve crosses its
boundary exactly twice, at most once per side.  A nice box then holds one
curve segment, which is replaced by the chord between the two crossings.

Crossings are roots of ``g`` on full grid lines and are shared by every box
having that line as a side, so neighbouring pieces join exactly.  Split
coordinates are shifted off the midpoint until no new corner lies on the
curve.

For the y-extremal points the analysis gets the extra critical polynomial
``Res(g_u, d g_u / dx, y)`` where ``g_u`` is ``g`` without its vertical and
horizontal line factors.

Examples
========

>>> from certmesh.curvemesh import curve_mesh
>>> from certmesh.interval import Box
>>> M = curve_mesh("x^2 + y^2 - 1", Box.from_pairs([(-2, 2), (-2, 2)]), "1/4")
>>> M.check_boxes(), M.num_components(), M.num_cycles()
(True, 1, 1)
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Callable, Sequence

from flint import fmpq, fmpq_poly

from .curvetop import CurveAnalysis, ypoly
from .errors import (DegenerateProjection, InconsistentAdjacency,
                     InternalInvariantViolation, RegionNotRegular)
from .interval import Box, Interval, as_box, excludes_zero
from .ratpoly import Polynomial, Q, resultant, split_content
from .render import SCHEMA_VERSION, dump_json, shortest_decimal, svg_open, svg_path, svg_rect
from .rootiso import (FiberPoint, RealAlgebraic, isolate_real_roots, upoly)

__all__ = [
    "NiceBox", "MeshVertex", "MeshingGraph", "ExtendedMeshingGraph",
    "PlanarDecomposition", "mpv2", "curve_mesh", "extend_meshing_graph",
    "y_extremal_poly", "curve_analysis_for_mesh", "column_rows",
]

#: subdivision depth after which a region is declared not regular
_DEPTH_CAP = 48
#: shifted split candidates tried per cut
_SHIFTS = 32
_ZERO = fmpq(0)


def _val(g: Polynomial, x, y) -> fmpq:
    return g.raw(Q(x), Q(y), _ZERO)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def y_extremal_poly(g) -> fmpq_poly:
    """Univariate polynomial whose roots contain the x-coordinates of all
    points of ``g = 0`` with a horizontal tangent or a singularity, line
    factors in one variable excluded.

    >>> y_extremal_poly("x^2 + y^2 - 1")
    x^2
    """
    g = Polynomial(g)
    _V, gv = split_content(g, ["x"])
    _U, gu = split_content(gv, ["y"])
    if gu.degree("y") < 1 or gu.degree("x") < 1:
        return fmpq_poly([1])
    R = resultant(gu, gu.diff("x"), "y")
    if R.is_zero() or R.is_constant():
        return fmpq_poly([1])
    p = upoly(R)
    return p / p.leading_coefficient()


def _rational_roots(p: fmpq_poly) -> list:
    if p.degree() < 1:
        return []
    _c, facs = p.factor()
    return sorted(-f[0] / f[1] for f, _m in facs if f.degree() == 1)


# ---------------------------------------------------------------------------
# crossings of grid lines
# ---------------------------------------------------------------------------

class _Crossing:
    """A root of ``g`` on the grid line ``x = t`` (axis 0) or ``y = t``
    (axis 1), isolated along the line."""

    __slots__ = ("axis", "t", "fp", "key")

    def __init__(self, axis: int, t: fmpq, fp: FiberPoint, index: int):
        self.axis, self.t, self.fp = axis, t, fp
        if self.exact:
            self.key = ("pt",) + self.exact_point()
        else:
            self.key = ("cross", axis, t, index)

    @property
    def lo(self) -> fmpq:
        return self.fp.lo if self.axis == 0 else self.fp.alpha.lo

    @property
    def hi(self) -> fmpq:
        return self.fp.hi if self.axis == 0 else self.fp.alpha.hi

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def exact_point(self) -> tuple:
        return (self.t, self.lo) if self.axis == 0 else (self.lo, self.t)

    def refine_once(self):
        if self.axis == 0:
            self.fp.refine_once()
        else:
            self.fp.alpha.refine_once()

    def point(self) -> FiberPoint:
        """The crossing as a planar algebraic point ``(x, y)``."""
        if self.axis == 0:
            return self.fp
        return FiberPoint.rational_y(self.fp.alpha, self.t)


class _Lines:
    """Roots of ``g`` on full grid lines of the box, computed once per line."""

    def __init__(self, g: Polynomial, B2: Box):
        self.g = g
        self.B2 = B2
        self._roots: dict = {}

    def roots(self, axis: int, t) -> list:
        t = Q(t)
        key = (axis, t)
        if key in self._roots:
            return self._roots[key]
        if axis == 0:
            p = ypoly(self.g, t)
            lo, hi = self.B2[1].lo, self.B2[1].hi
        else:
            p = upoly(self.g.subs({"y": t}))
            lo, hi = self.B2[0].lo, self.B2[0].hi
        if p.is_zero():
            raise InternalInvariantViolation(f"grid line {'xy'[axis]} = {t} lies on the curve")
        out = []
        if p.degree() > 0:
            out = self._isolate(axis, t, p, lo, hi)
        self._roots[key] = out
        return out

    @staticmethod
    def _isolate(axis, t, p, lo, hi) -> list:
        out = []
        sq = p // p.gcd(p.derivative()) if p.degree() > 1 else p
        sq = sq / sq.leading_coefficient()
        if axis == 0:
            al = RealAlgebraic.rational(t)
            for k, (a, b) in enumerate(isolate_real_roots(sq, lo, hi)):
                if a == b:
                    fp = FiberPoint.rational_y(al, a)
                else:
                    fp = FiberPoint(al, [fmpq_poly([c]) for c in sq.coeffs()], a, b)
                out.append(_Crossing(0, t, fp, k))
        else:
            for k, ra in enumerate(RealAlgebraic.roots_of(sq, lo, hi)):
                out.append(_Crossing(1, t, FiberPoint.rational_y(ra, t), k))
        return out

    def on_segment(self, axis: int, t, lo, hi) -> list:
        """Crossings of the closed segment ``[lo, hi]`` of a grid line."""
        lo, hi = Q(lo), Q(hi)
        out = []
        for c in self.roots(axis, t):
            while True:
                if c.exact:
                    if lo <= c.lo <= hi:
                        out.append(c)
                    break
                if c.hi <= lo or c.lo >= hi:
                    break  # endpoints of an inexact interval are not roots
                if lo <= c.lo and c.hi <= hi:
                    out.append(c)
                    break
                c.refine_once()
        return out


# ---------------------------------------------------------------------------
# nice boxes and the quadtree
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class NiceBox:
    """A leaf of the subdivision.

    ``kind`` is ``"empty"`` (no curve), ``"nice"`` (one curve segment between
    the two ``crossings``) or ``"line"`` (a piece of a column gap bounded by
    a vertical line of the curve).  ``data`` holds what an acceptance test
    returned for the box.
    """

    box: Box
    kind: str
    crossings: tuple = ()
    data: object = None
    apexes: tuple = ()


_SIDES = ((0, 0, 1), (0, 1, 1), (1, 0, 0), (1, 1, 0))  # (axis, upper, along)


def _side_segments(B: Box) -> list:
    """``(axis, t, lo, hi)`` for the left, right, bottom and top sides."""
    out = []
    for axis, upper, along in _SIDES:
        iv = B[axis]
        t = iv.hi if upper else iv.lo
        out.append((axis, t, B[along].lo, B[along].hi))
    return out


class _Subdivider:
    """Quadtree subdivision into nice boxes of size at most ``eps``."""

    def __init__(self, g: Polynomial, lines: _Lines, eps, accept: Callable | None = None):
        self.g = g
        self.gx = g.diff("x")
        self.gy = g.diff("y")
        self.lines = lines
        self.eps = Q(eps)
        self.accept = accept

    def classify(self, B: Box):
        """``(kind, crossings)`` when ``B`` is nice, else ``None``."""
        if excludes_zero(self.g, B):
            return "empty", ()
        found = {}
        for axis, t, lo, hi in _side_segments(B):
            inner = 0
            for c in self.lines.on_segment(axis, t, lo, hi):
                found[c.key] = c
                if not (c.exact and c.lo in (lo, hi)):
                    inner += 1
            if inner > 1:
                return None
        if len(found) not in (0, 2):
            return None
        if not (excludes_zero(self.gx, B) or excludes_zero(self.gy, B)):
            return None
        if not found:
            return "empty", ()
        return "nice", tuple(sorted(found.values(), key=lambda c: repr(c.key)))

    def cut(self, B: Box, axis: int, line_x=None) -> fmpq:
        """A split coordinate near the middle whose new corners are off the
        curve (``line_x`` marks an allowed vertical line of the curve)."""
        lo, hi = B[axis].lo, B[axis].hi
        w = hi - lo
        other = 1 - axis
        for k in range(_SHIFTS):
            shift = (k + 1) // 2 * (1 if k % 2 else -1)
            s = lo + w / 2 + shift * w / 64
            ends = (B[other].lo, B[other].hi)
            if axis == 0:
                if line_x is not None and s == line_x:
                    continue
                if ypoly(self.g, s).is_zero():
                    continue
                if any(_val(self.g, s, e) == 0 for e in ends):
                    continue
            else:
                if self.g.subs({"y": s}).is_zero():
                    continue
                if any(_val(self.g, e, s) == 0 and e != line_x for e in ends):
                    continue
            return s
        raise RegionNotRegular(f"no admissible split of {B}")

    def run(self, root: Box, known_empty: bool = False, line_x=None,
            kind: str | None = None) -> list:
        leaves = []
        stack = [(root, 0)]
        while stack:
            B, depth = stack.pop()
            info = None
            if B.length <= self.eps:
                if known_empty:
                    info = (kind or "empty", ())
                else:
                    info = self.classify(B)
            if info is not None:
                leaf = NiceBox(B, info[0], info[1])
                if self.accept is None or self.accept(leaf):
                    leaves.append(leaf)
                    continue
            if depth >= _DEPTH_CAP:
                raise RegionNotRegular(f"subdivision of {root} did not terminate near {B}")
            axis = 0 if B[0].width >= B[1].width else 1
            s = self.cut(B, axis, line_x)
            lo_iv, hi_iv = B[axis].split(s)
            stack.append((B.replace(axis, hi_iv), depth + 1))
            stack.append((B.replace(axis, lo_iv), depth + 1))
        return leaves


def mpv2(g, region: Sequence, eps) -> "MeshingGraph":
    """Mesh a curve inside boxes free of singular and extremal points.

    Every box of ``region`` is subdivided into nice boxes of size at most
    ``eps``; each nice box with a curve segment contributes the chord
    between its two boundary crossings.  A rational abscissa of a
    y-extremal point inside a box is cut first, so that a horizontal
    tangency on the region boundary becomes a box corner.

    >>> from certmesh.interval import Box
    >>> M = mpv2("y - x", [Box.from_pairs([(0, 1), (0, 1)])], "1/4")
    >>> M.num_components(), M.num_cycles(), M.check_boxes()
    (1, 0, True)
    """
    g = Polynomial(g)
    region = [B if isinstance(B, Box) else Box(B) for B in region]
    hull = region[0]
    for B in region[1:]:
        hull = Box([hull[i].hull(B[i]) for i in range(2)])
    lines = _Lines(g, hull)
    sub = _Subdivider(g, lines, eps)
    M = MeshingGraph(g, hull, Q(eps))
    cuts = _rational_roots(y_extremal_poly(g))
    pieces = []
    for B in region:
        xs = [B[0].lo] + [c for c in cuts if B[0].lo < c < B[0].hi] + [B[0].hi]
        pieces.extend(B.replace(0, (u, v)) for u, v in zip(xs, xs[1:]))
    for B in pieces:
        for leaf in sub.run(B):
            M.leaves.append(leaf)
            if leaf.kind == "nice":
                a, b = (M._crossing_vertex(c) for c in leaf.crossings)
                M._add_edge(a, b, leaf.box, "nice")
    M._finish_positions()
    return M


# ---------------------------------------------------------------------------
# vertices, graphs
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class MeshVertex:
    """A mesh vertex.  ``point`` is an exact planar point (``None`` for
    rational points, which carry ``exact``); ``position`` is a rational
    point within the isolating box used for output."""

    index: int
    key: tuple
    kind: str
    on_curve: bool
    exact: tuple | None = None
    point: FiberPoint | None = None
    crossing: _Crossing | None = None
    position: tuple = ()

    def interval(self, axis: int) -> tuple:
        if self.exact is not None:
            return self.exact[axis], self.exact[axis]
        if self.crossing is not None:
            c = self.crossing
            if c.axis == axis:
                return c.t, c.t
            return c.lo, c.hi
        fp = self.point
        if axis == 0:
            return fp.alpha.lo, fp.alpha.hi
        return fp.lo, fp.hi

    def refine_once(self, axis: int):
        if self.crossing is not None:
            self.crossing.refine_once()
        elif self.point is not None:
            if axis == 0:
                self.point.alpha.refine_once()
            else:
                self.point.refine_once()

    def fiber(self) -> FiberPoint:
        """The vertex as an exact planar point."""
        if self.exact is not None:
            return FiberPoint.rational_y(RealAlgebraic.rational(self.exact[0]), self.exact[1])
        if self.crossing is not None:
            return self.crossing.point()
        return self.point


@dataclass(eq=False)
class MeshingGraph:
    """Straight-line approximation of a curve with a certifying box per edge.

    ``edges`` holds ``(i, j)`` vertex pairs, ``edge_box[k]`` the box that
    contains both the k-th edge and the curve piece it replaces, and
    ``edge_kind[k]`` one of ``"nice"``, ``"stitch"`` or ``"line"``.
    ``seg_boxes`` are the segregating boxes of the singular part.
    """

    curve: Polynomial
    box: Box
    eps: fmpq
    vertices: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    edge_box: list = field(default_factory=list)
    edge_kind: list = field(default_factory=list)
    leaves: list = field(default_factory=list)
    seg_boxes: list = field(default_factory=list)
    _by_key: dict = field(default_factory=dict, repr=False)

    # construction ------------------------------------------------------------
    def _vertex(self, key, kind, on_curve, **kw) -> int:
        v = self._by_key.get(key)
        if v is not None:
            return v
        v = len(self.vertices)
        self.vertices.append(MeshVertex(v, key, kind, on_curve, **kw))
        self._by_key[key] = v
        return v

    def _crossing_vertex(self, c: _Crossing) -> int:
        if c.exact:
            return self._vertex(c.key, "crossing", True, exact=c.exact_point())
        return self._vertex(c.key, "crossing", True, crossing=c)

    def _point_vertex(self, x, y, kind="corner") -> int:
        x, y = Q(x), Q(y)
        return self._vertex(("pt", x, y), kind, _val(self.curve, x, y) == 0, exact=(x, y))

    def _add_edge(self, a: int, b: int, box: Box, kind: str):
        self.edges.append((a, b))
        self.edge_box.append(box)
        self.edge_kind.append(kind)

    def _finish_positions(self, scale=None):
        scale = self.eps / 1024 if scale is None else scale
        for v in self.vertices:
            if v.position:
                continue
            if v.exact is not None:
                v.position = v.exact
                continue
            pos = []
            for axis in (0, 1):
                lo, hi = v.interval(axis)
                while hi - lo > scale:
                    v.refine_once(axis)
                    lo, hi = v.interval(axis)
                pos.append((lo + hi) / 2)
            v.position = tuple(pos)

    # checks --------------------------------------------------------------------
    @property
    def points(self) -> list:
        return [v.position for v in self.vertices]

    def check_boxes(self) -> bool:
        """Every certifying box has size at most ``eps`` and contains its edge."""
        for (a, b), B in zip(self.edges, self.edge_box):
            if B.length > self.eps:
                return False
            for v in (a, b):
                p = self.vertices[v].position
                if not B.contains(Box.point(p)):
                    return False
        return True

    def _adjacency(self) -> dict:
        adj = {}
        for a, b in self.edges:
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        return adj

    def num_components(self) -> int:
        adj = self._adjacency()
        seen, n = set(), 0
        for s in adj:
            if s in seen:
                continue
            n += 1
            stack = [s]
            seen.add(s)
            while stack:
                u = stack.pop()
                for w in adj[u] - seen:
                    seen.add(w)
                    stack.append(w)
        return n

    def num_cycles(self) -> int:
        """Rank of the cycle space of the edge graph."""
        nv = len(self._adjacency())
        return len(set(frozenset(e) for e in self.edges)) - nv + self.num_components()

    # output --------------------------------------------------------------------
    def _vertex_json(self, v: MeshVertex) -> dict:
        (xl, xh), (yl, yh) = v.interval(0), v.interval(1)
        x, y = v.position
        return {
            "id": v.index, "kind": v.kind, "on_curve": v.on_curve,
            "position": [shortest_decimal(x, xl, xh) if xl < xh else shortest_decimal(x),
                         shortest_decimal(y, yl, yh) if yl < yh else shortest_decimal(y)],
            "exact": [str(x), str(y)],
            "interval": [[str(xl), str(xh)], [str(yl), str(yh)]],
        }

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "type": "meshing_graph",
            "curve": self.curve.expand_str(),
            "box": self.box.to_json(),
            "eps": str(self.eps),
            "vertices": [self._vertex_json(v) for v in self.vertices],
            "edges": [{"ends": [a, b], "kind": k, "box": B.to_json()}
                      for (a, b), k, B in zip(self.edges, self.edge_kind, self.edge_box)],
            "segregating_boxes": [B.to_json() for B in self.seg_boxes],
        }

    def to_json(self) -> str:
        return dump_json(self.to_dict())

    def to_svg(self, layers: Sequence = ("boxes", "segregating", "stitches"),
               width: int = 600) -> str:
        """SVG drawing; ``layers`` selects the certifying nice boxes, the
        segregating boxes and the highlighting of stitching edges."""
        out = svg_open(self.box, width)
        if "boxes" in layers:
            out.append('<g id="boxes">')
            for leaf in self.leaves:
                if leaf.kind == "nice":
                    out.append(svg_rect(leaf.box, 'fill="none" stroke="#9ab" stroke-width="0.5"'))
            out.append("</g>")
        if "segregating" in layers:
            out.append('<g id="segregating">')
            for B in self.seg_boxes:
                out.append(svg_rect(B, 'fill="#fdd" fill-opacity="0.5" stroke="#c66" '
                                       'stroke-width="0.5"'))
            out.append("</g>")
        out.append('<g id="edges">')
        for (a, b), k in zip(self.edges, self.edge_kind):
            colour = "#d40" if k == "stitch" and "stitches" in layers else "black"
            out.append(svg_path(self.vertices[a].position, self.vertices[b].position,
                                f"stroke:{colour};stroke-width:1.2;fill:none"))
        out.append("</g>")
        out.append("</svg>")
        return "\n".join(out) + "\n"


@dataclass(eq=False)
class ExtendedMeshingGraph(MeshingGraph):
    """A meshing graph completed to a triangulation of the whole box.

    ``cells`` are vertex triples ``(n, a, b)``, counter-clockwise, whose
    first vertex is off the curve; ``cell_region[k]`` indexes ``regions``,
    the pieces of the decomposition the cell belongs to.  ``tri_edges``
    lists every cell side once as ``(i, j, on_curve_edge)``.
    """

    cells: list = field(default_factory=list)
    cell_region: list = field(default_factory=list)
    regions: list = field(default_factory=list)
    tri_edges: list = field(default_factory=list)

    def cell_area(self, cell) -> fmpq:
        (ax, ay), (bx, by), (cx, cy) = (self.vertices[v].position for v in cell)
        return ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax)) / 2

    def total_area(self) -> fmpq:
        return sum((self.cell_area(c) for c in self.cells), fmpq(0))

    def check_cells(self) -> bool:
        """Cells are positively oriented and exactly cover the box."""
        if any(self.cell_area(c) <= 0 for c in self.cells):
            return False
        if self.total_area() != self.box.volume():
            return False
        return all(not self.vertices[c[0]].on_curve for c in self.cells)

    def euler_characteristic(self) -> int:
        used = {v for c in self.cells for v in c}
        return len(used) - len(self.tri_edges) + len(self.cells)

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["type"] = "extended_meshing_graph"
        d["cells"] = [list(c) for c in self.cells]
        return d


# ---------------------------------------------------------------------------
# the planar decomposition
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class _Region:
    """A piece of the decomposition.  ``kind`` is ``"critical"`` (segregating
    box of ``vertex``), ``"nice"``, ``"empty"`` or ``"line"``."""

    kind: str
    box: Box
    vertex: int | None = None
    leaf: NiceBox | None = None
    column: int | None = None
    apexes: tuple = ()
    polygon: tuple = ()


class PlanarDecomposition:
    """Singular part (columns) and smooth part (strips) of a curve.

    ``ca`` is a finished :class:`CurveAnalysis` whose extra columns include
    :func:`y_extremal_poly`.  With ``tile`` the column gaps are subdivided
    as well and every piece is at most ``eps``; ``accept(leaf)`` may veto a
    leaf, which is then split further.
    """

    def __init__(self, ca: CurveAnalysis, eps, accept: Callable | None = None,
                 tile: bool = False):
        self.ca = ca
        self.g = ca.g
        self.B2 = ca.B2
        self.eps = Q(eps)
        self.tile = tile
        self.lines = _Lines(self.g, self.B2)
        self.sub = _Subdivider(self.g, self.lines, self.eps, accept)
        self.mesh = MeshingGraph(self.g, self.B2, self.eps)
        self.regions: list = []
        self._line_columns: dict = {}
        self._columns()
        self._strips()
        for r in self.regions:
            r._owner = self

    # singular part ---------------------------------------------------------------
    def _column_rows(self, col) -> list:
        return column_rows(self.ca, col, self.eps)

    def _columns(self):
        ca, M = self.ca, self.mesh
        last = len(ca.columns) - 1
        for ci, col in enumerate(ca.columns):
            a, b = col.a, col.b
            rows = self._column_rows(col)
            line_x = None
            if col.vertical:
                line_x = col.alpha.lo if col.alpha.is_rational() else None
                self._line_columns[ci] = line_x
            ys = []
            for k, (fp, on_gv, c, d, L, R) in enumerate(rows):
                S = Box.from_pairs([(a, b), (c, d)])
                M.seg_boxes.append(S)
                P = M._vertex(("crit", ci, k), "critical", True, point=fp)
                if fp.is_rational():
                    M._by_key.setdefault(("pt", fp.alpha.lo, fp.lo), P)
                self.regions.append(_Region("critical", S, vertex=P, column=ci, apexes=(P,)))
                self._stitch(P, S, L, R, has_left=ci > 0, has_right=ci < last)
                if col.vertical:
                    self._line_in_box(P, fp, S, line_x, col)
                ys.append((c, d))
            # gaps between segregating boxes
            bounds = [ca.Y1] + [v for cd in ys for v in cd] + [ca.Y2]
            for y0, y1 in zip(bounds[::2], bounds[1::2]):
                if y0 > y1:
                    raise InternalInvariantViolation("overlapping segregating boxes")
                if y0 == y1:
                    continue
                self._gap(ci, col, a, b, y0, y1, line_x)

    def _stitch(self, P: int, S: Box, L: int, R: int, has_left: bool, has_right: bool):
        (a, b), (c, d) = (S[0].lo, S[0].hi), (S[1].lo, S[1].hi)
        for side, count, present in ((a, L, has_left), (b, R, has_right)):
            if not present:
                if count:
                    raise InternalInvariantViolation("branches through the box boundary")
                continue
            cr = [q for q in self.lines.on_segment(0, side, c, d)]
            if any(q.exact and q.lo in (c, d) for q in cr) or len(cr) != count:
                raise InternalInvariantViolation(
                    f"stitching found {len(cr)} crossings for {count} branches")
            for q in cr:
                self.mesh._add_edge(P, self.mesh._crossing_vertex(q), S, "stitch")

    def _line_vertex(self, col, line_x, y) -> int:
        M = self.mesh
        if line_x is not None:
            return M._point_vertex(line_x, y, "line")
        key = ("line", col.index, Q(y))
        return M._vertex(key, "line", True, point=FiberPoint.rational_y(col.alpha, y))

    def _line_in_box(self, P, fp, S, line_x, col):
        c, d = S[1].lo, S[1].hi
        for yv in (c, d):
            if fp.lo == fp.hi == yv:
                continue
            self.mesh._add_edge(P, self._line_vertex(col, line_x, yv), S, "line")

    def _gap(self, ci, col, a, b, y0, y1, line_x):
        M = self.mesh
        if col.vertical:
            # points along the line at most eps apart
            n = 1
            while (y1 - y0) / n > self.eps:
                n *= 2
            ys = [y0 + (y1 - y0) * k / n for k in range(n + 1)]
            if self.tile:
                if line_x is None:
                    raise DegenerateProjection(
                        "tiling next to a vertical line at an irrational abscissa is not supported")
                # leaves split by an acceptance test add break points on the line
                breaks = set(ys)
                for u, v in zip(ys, ys[1:]):
                    for x0, x1 in ((a, line_x), (line_x, b)):
                        if x0 == x1:
                            continue
                        root = Box.from_pairs([(x0, x1), (u, v)])
                        for leaf in self.sub.run(root, known_empty=True, line_x=line_x,
                                                 kind="line"):
                            self._leaf_region(leaf, ci)
                            breaks.update((leaf.box[1].lo, leaf.box[1].hi))
                ys = sorted(breaks)
            else:
                self.regions.append(_Region("gap", Box.from_pairs([(a, b), (y0, y1)]), column=ci))
            for u, v in zip(ys, ys[1:]):
                B = Box.from_pairs([(a, b), (u, v)])
                M._add_edge(self._line_vertex(col, line_x, u),
                            self._line_vertex(col, line_x, v), B, "line")
            return
        root = Box.from_pairs([(a, b), (y0, y1)])
        if not self.tile:
            self.regions.append(_Region("gap", root, column=ci))
            return
        for leaf in self.sub.run(root, known_empty=True):
            self._leaf_region(leaf, ci)

    # smooth part -------------------------------------------------------------------
    def _strips(self):
        ca, M = self.ca, self.mesh
        for c0, c1 in zip(ca.columns, ca.columns[1:]):
            x0, x1 = c0.b, c1.a
            if x0 > x1:
                raise InternalInvariantViolation("overlapping critical columns")
            if x0 == x1:
                continue
            for x in (x0, x1):
                for y in (ca.Y1, ca.Y2):
                    if _val(self.g, x, y) == 0:
                        raise InternalInvariantViolation("strip corner on the curve")
            root = Box.from_pairs([(x0, x1), (ca.Y1, ca.Y2)])
            for leaf in self.sub.run(root):
                M.leaves.append(leaf)
                self._leaf_region(leaf, None)
                if leaf.kind == "nice":
                    if any(c.exact and c.exact_point() in _corners(leaf.box) for c in leaf.crossings):
                        raise InternalInvariantViolation("crossing at a box corner")
                    a, b = (M._crossing_vertex(c) for c in leaf.crossings)
                    M._add_edge(a, b, leaf.box, "nice")

    def _leaf_region(self, leaf: NiceBox, ci):
        self.regions.append(_Region(leaf.kind, leaf.box, leaf=leaf, column=ci))

    # results -------------------------------------------------------------------------
    def meshing_graph(self) -> MeshingGraph:
        self.mesh._finish_positions()
        return self.mesh

    @property
    def singular_part(self) -> list:
        return [r for r in self.regions if r.column is not None]

    @property
    def smooth_part(self) -> list:
        return [r for r in self.regions if r.column is None]


def column_rows(ca: CurveAnalysis, col, eps) -> list:
    """``(fp, on_gv, c, d, L, R)`` per point of a column.  Points off
    ``g_v`` (ends and events of a vertical line) have a point interval,
    which is widened towards the neighbours, by at most ``eps / 2``."""
    rows = []
    n = len(col._fibre)
    for k, ((fp, on_gv), (c, d), (L, R)) in enumerate(
            zip(col._fibre, col._ivs, col._branches)):
        if not on_gv and c == d:
            below = ca.Y1 if k == 0 else col._ivs[k - 1][1]
            above = ca.Y2 if k + 1 == n else col._ivs[k + 1][0]
            c = c if c == ca.Y1 else max((c + below) / 2, c - eps / 2)
            d = d if d == ca.Y2 else min((d + above) / 2, d + eps / 2)
        rows.append((fp, on_gv, c, d, L, R))
    return rows


def _corners(B: Box) -> set:
    return {(x, y) for x in (B[0].lo, B[0].hi) for y in (B[1].lo, B[1].hi)}


def curve_analysis_for_mesh(g, B2, eps, extra_columns: Sequence = (),
                            vertical_hook: Callable | None = None) -> CurveAnalysis:
    """A curve analysis whose columns also contain the y-extremal points."""
    extra = [y_extremal_poly(g)] + list(extra_columns)
    return CurveAnalysis(g, B2, eps, extra_columns=extra, vertical_hook=vertical_hook)


def curve_mesh(g, B2, eps) -> MeshingGraph:
    """Certified ``eps``-mesh of ``g = 0`` in ``B2``.

    Every edge lies in a box of size at most ``eps`` together with the
    piece of curve it stands for, and the edge graph is isotopic to the
    curve.

    >>> from certmesh.interval import Box
    >>> M = curve_mesh("y^2 - x^2", Box.from_pairs([(-1, 1), (-1, 1)]), "1/4")
    >>> M.num_components(), M.check_boxes()
    (1, True)
    """
    B2 = as_box(B2)
    ca = curve_analysis_for_mesh(g, B2, eps)
    return PlanarDecomposition(ca, eps).meshing_graph()


# ---------------------------------------------------------------------------
# extension to a triangulation
# ---------------------------------------------------------------------------

def extend_meshing_graph(g, singular_part, smooth_part) -> ExtendedMeshingGraph:
    """Triangulate the box around a meshing graph.

    ``singular_part`` and ``smooth_part`` are the two halves of one
    :class:`PlanarDecomposition` built with ``tile=True``.  Segregating
    boxes are fanned from their curve point, halves of nice boxes from an
    interior point on the correct side of the chord, and empty boxes from
    their centre.  Consecutive curve points on a grid line get an
    off-curve separator between them, so every cell has an off-curve vertex.

    >>> from certmesh.interval import Box
    >>> from certmesh.curvemesh import PlanarDecomposition, curve_analysis_for_mesh
    >>> ca = curve_analysis_for_mesh("x^2 + y^2 - 1", Box.from_pairs([(-2, 2), (-2, 2)]), "1/2")
    >>> D = PlanarDecomposition(ca, "1/2", tile=True)
    >>> E = extend_meshing_graph(ca.g, D.singular_part, D.smooth_part)
    >>> E.check_cells(), E.euler_characteristic()
    (True, 1)
    """
    regions = list(singular_part) + list(smooth_part)
    if not regions:
        raise InternalInvariantViolation("empty decomposition")
    D = getattr(regions[0], "_owner", None)
    if D is None:
        raise InternalInvariantViolation("regions do not come from a decomposition")
    return _Tiler(D, regions).run()


class _Tiler:
    def __init__(self, D: PlanarDecomposition, regions: list):
        if not D.tile:
            raise InternalInvariantViolation("decomposition was built without tiling")
        self.D = D
        M = D.mesh
        E = ExtendedMeshingGraph(M.curve, M.box, M.eps)
        E.vertices, E.edges, E.edge_box, E.edge_kind = M.vertices, M.edges, M.edge_box, M.edge_kind
        E.leaves, E.seg_boxes, E._by_key = M.leaves, M.seg_boxes, M._by_key
        self.E = E
        self.regions = regions
        self.vlines: dict = {}
        self.hlines: dict = {}

    # line registry ---------------------------------------------------------------------
    def _register(self, v: int):
        vert = self.E.vertices[v]
        xl, xh = vert.interval(0)
        yl, yh = vert.interval(1)
        if xl == xh and self._on_side(0, xl, yl, yh):
            self.vlines.setdefault(xl, set()).add(v)
        if yl == yh and self._on_side(1, yl, xl, xh):
            self.hlines.setdefault(yl, set()).add(v)

    def _on_side(self, axis: int, t, lo, hi) -> bool:
        """Whether ``[lo, hi]`` on the grid line ``axis = t`` meets a side of
        some region."""
        spans = self.sides.get((axis, t))
        if not spans:
            return False
        k = bisect_right(spans[0], hi)
        return k > 0 and spans[1][k - 1] >= lo

    def _collect(self):
        E = self.E
        self.sides: dict = {}
        for r in self.regions:
            B = r.box
            for axis in (0, 1):
                span = (B[1 - axis].lo, B[1 - axis].hi)
                for t in (B[axis].lo, B[axis].hi):
                    self.sides.setdefault((axis, t), []).append(span)
        for key, spans in self.sides.items():
            # merged, sorted spans as (starts, ends)
            merged = []
            for a, b in sorted(spans):
                if merged and a <= merged[-1][1]:
                    merged[-1][1] = max(merged[-1][1], b)
                else:
                    merged.append([a, b])
            self.sides[key] = ([a for a, _ in merged], [b for _, b in merged])
        for r in self.regions:
            for x, y in _corners(r.box):
                self._register(E._point_vertex(x, y))
            if r.kind == "nice":
                for c in r.leaf.crossings:
                    self._register(E._crossing_vertex(c))
        for r in self.regions:
            if r.kind == "critical":
                vert = E.vertices[r.vertex]
                (xl, xh), (yl, yh) = vert.interval(0), vert.interval(1)
                if (xl == xh and xl in (r.box[0].lo, r.box[0].hi)) or \
                        (yl == yh and yl in (r.box[1].lo, r.box[1].hi)):
                    self._register(r.vertex)
        for v in E.vertices:
            if v.kind in ("crossing", "line"):
                self._register(v.index)

    def _sorted(self, members: set, axis: int) -> list:
        """Members of a grid line ordered along it (``axis`` is the varying
        coordinate), refined until their intervals are disjoint."""
        V = self.E.vertices
        order = list(members)
        while True:
            order.sort(key=lambda v: V[v].interval(axis))
            clash = False
            for u, w in zip(order, order[1:]):
                ul, uh = V[u].interval(axis)
                wl, wh = V[w].interval(axis)
                if uh >= wl:
                    if ul == uh == wl == wh:
                        raise InternalInvariantViolation("two vertices at one point")
                    clash = True
                    V[u if uh - ul >= wh - wl else w].refine_once(axis)
            if not clash:
                return order

    def _separators(self):
        """Off-curve points between consecutive curve points of each line."""
        E, g = self.E, self.D.g
        for lines, axis in ((self.vlines, 1), (self.hlines, 0)):
            for t in list(lines):
                if axis == 1 and t in self.D._line_columns.values():
                    continue  # a vertical line of the curve itself
                order = self._sorted(lines[t], axis)
                for u, w in zip(order, order[1:]):
                    if not (E.vertices[u].on_curve and E.vertices[w].on_curve):
                        continue
                    s = (E.vertices[u].interval(axis)[1] + E.vertices[w].interval(axis)[0]) / 2
                    if not self._on_side(1 - axis, t, s, s):
                        continue
                    x, y = (t, s) if axis == 1 else (s, t)
                    if _val(g, x, y) == 0:
                        raise InternalInvariantViolation("separator on the curve")
                    v = E._vertex(("pt", Q(x), Q(y)), "separator", False, exact=(Q(x), Q(y)))
                    lines[t].add(v)
                    other = self.hlines if axis == 1 else self.vlines
                    other.setdefault(Q(y) if axis == 1 else Q(x), set()).add(v)

    def _positions(self):
        E = self.E
        lines = {}
        for t, members in self.vlines.items():
            lines[("v", t)] = self._sorted(members, 1)
        for t, members in self.hlines.items():
            lines[("h", t)] = self._sorted(members, 0)
        # vertices are now separated along every line they lie on
        scale = self.D.eps / 1024
        for v in E.vertices:
            if v.exact is not None:
                v.position = v.exact
                continue
            pos = []
            for axis in (0, 1):
                lo, hi = v.interval(axis)
                while hi - lo > scale:
                    v.refine_once(axis)
                    lo, hi = v.interval(axis)
                pos.append((lo + hi) / 2)
            v.position = tuple(pos)
        self.line_order = {k: self._sorted(set(m), 1 if k[0] == "v" else 0) for k, m in lines.items()}
        self.line_starts = {k: [E.vertices[v].interval(1 if k[0] == "v" else 0)[0] for v in o]
                            for k, o in self.line_order.items()}

    def _side(self, key, axis, lo, hi, reverse=False, drop_first=False, drop_last=False) -> list:
        V = self.E.vertices
        order = self.line_order.get(key, ())
        out = []
        if order:
            # intervals along a line are disjoint and sorted
            for v in order[bisect_left(self.line_starts[key], lo):]:
                if V[v].interval(axis)[1] > hi:
                    break
                out.append(v)
        if reverse:
            out.reverse()
        if drop_first:
            out = out[1:]
        if drop_last:
            out = out[:-1]
        return out

    def polygon(self, B: Box) -> list:
        """Vertices on the boundary of ``B``, counter-clockwise from the
        lower-left corner."""
        (x0, x1), (y0, y1) = (B[0].lo, B[0].hi), (B[1].lo, B[1].hi)
        bottom = self._side(("h", y0), 0, x0, x1)
        right = self._side(("v", x1), 1, y0, y1, drop_first=True)
        top = self._side(("h", y1), 0, x0, x1, reverse=True, drop_first=True)
        left = self._side(("v", x0), 1, y0, y1, reverse=True, drop_first=True, drop_last=True)
        return bottom + right + top + left

    # cells -----------------------------------------------------------------------------
    def _fan(self, apex: int, ring: list, region: int, closed: bool = True):
        E = self.E
        n = len(ring)
        pairs = [(ring[i], ring[(i + 1) % n]) for i in range(n if closed else n - 1)]
        for u, w in pairs:
            if apex in (u, w):
                continue
            if not E.vertices[apex].on_curve:
                cell = (apex, u, w)
            elif not E.vertices[u].on_curve:
                cell = (u, w, apex)
            elif not E.vertices[w].on_curve:
                cell = (w, apex, u)
            else:
                raise InconsistentAdjacency("cell without an off-curve vertex")
            E.cells.append(cell)
            E.cell_region.append(region)

    def _apex_for(self, ring: list, sign: int, corner) -> int | None:
        """An interior point of the convex polygon ``ring`` where ``g`` has
        ``sign``, fanning positively."""
        E, g = self.E, self.D.g
        pts = [E.vertices[v].position for v in ring]
        cx = sum((p[0] for p in pts), fmpq(0)) / len(pts)
        cy = sum((p[1] for p in pts), fmpq(0)) / len(pts)
        for _ in range(60):
            if _sign(_val(g, cx, cy)) == sign and _fans(pts, (cx, cy)):
                return E._vertex(("pt", cx, cy), "apex", False, exact=(cx, cy))
            cx, cy = (cx + corner[0]) / 2, (cy + corner[1]) / 2
        return None

    def run(self) -> ExtendedMeshingGraph:
        self._collect()
        self._separators()
        self._positions()
        E, g = self.E, self.D.g
        for ri, r in enumerate(self.regions):
            ring = self.polygon(r.box)
            r.polygon = tuple(ring)
            E.regions.append(r)
            if r.kind == "critical":
                P = r.vertex
                if P in ring:
                    k = ring.index(P)
                    self._fan(P, ring[k + 1:] + ring[:k], ri, closed=False)
                else:
                    self._fan(P, ring, ri)
            elif r.kind == "nice":
                self._nice_cells(r, ring, ri)
            else:
                x, y = r.box.mid
                if r.kind == "line" and _val(g, x, y) == 0:
                    raise InternalInvariantViolation("box centre on the curve")
                n = E._vertex(("pt", x, y), "apex", False, exact=(x, y))
                E.vertices[n].position = (x, y)
                r.apexes = (n,)
                self._fan(n, ring, ri)
        self._edges()
        if not E.check_cells():
            raise InconsistentAdjacency("cells do not tile the box")
        return E

    def _nice_cells(self, r: _Region, ring: list, ri: int):
        E, g = self.E, self.D.g
        q, t = (E._crossing_vertex(c) for c in r.leaf.crossings)
        iq, it = ring.index(q), ring.index(t)
        halves = []
        for s, e in ((iq, it), (it, iq)):
            half = [ring[s]]
            k = s
            while k != e:
                k = (k + 1) % len(ring)
                half.append(ring[k])
            halves.append(half)
        apexes = []
        corners = _corners(r.box)
        for half in halves:
            corner = next(E.vertices[v].exact for v in half
                          if E.vertices[v].exact in corners)
            n = self._apex_for(half, _sign(_val(g, *corner)), corner)
            if n is None:
                raise InconsistentAdjacency("no interior point for a nice box half")
            E.vertices[n].position = E.vertices[n].exact
            apexes.append(n)
            self._fan(n, half, ri)
        r.apexes = tuple(apexes)

    def _edges(self):
        E = self.E
        curve = set(frozenset(e) for e in E.edges)
        seen = {}
        for a, b, c in E.cells:
            for u, w in ((a, b), (b, c), (c, a)):
                k = frozenset((u, w))
                if k not in seen:
                    seen[k] = (u, w, k in curve)
        E.tri_edges = list(seen.values())
        missing = curve - set(seen)
        if missing:
            raise InconsistentAdjacency("a mesh edge is not a cell side")


def _fans(pts: list, n: tuple) -> bool:
    m = len(pts)
    for i in range(m):
        p, q = pts[i], pts[(i + 1) % m]
        if (p[0] - n[0]) * (q[1] - n[1]) - (p[1] - n[1]) * (q[0] - n[0]) <= 0:
            return False
    return True
