"""Certified epsilon-meshes of algebraic surfaces.

The projection curve of the surface is enlarged by the curve ``G_1`` of
possible z-extremal points and meshed in the plane as in
:mod:`certmesh.curvemesh`, with extra critical columns at the roots of the
polynomials ``T`` and ``I`` of the irreducible chains of the curve above
it.  Every piece of the planar decomposition then carries a certificate in
space:

* a segregating box ``S`` of a column point ``P`` becomes ``S x [e_k, f_k]``
  for each slab of the 3-D segregated box of ``P``;
* every other piece ``B`` (nice, empty, or next to a vertical line) gets
  *clusters*: groups of consecutive sheets above it enclosed by two
  horizontal walls on which ``f`` is certified nonzero over all of ``B``,
  at most ``eps`` apart.

The planar triangulation is lifted to the surface (see
:func:`certmesh.surftop.lift_complex`); each face lies over one piece, and
its certifying box is the piece times the slab or cluster holding it.
Faces over the columns and over the strips between them are assembled
separately and merged along their common vertices.

Examples
========

>>> from certmesh.surfmesh import surface_mesh
>>> M = surface_mesh("x^2 + y^2 + z^2 - 1", "[-2,2]x[-2,2]x[-2,2]", "1/2")
>>> M.euler_characteristic(), M.num_components(), M.is_watertight(), M.check_boxes()
(2, 1, True, True)
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Sequence

from flint import fmpq, fmpq_poly

from .curvemesh import (ExtendedMeshingGraph, NiceBox, PlanarDecomposition,
                        _Crossing, _Subdivider, _Lines, _Tiler, _corners,
                        _val, column_rows, curve_analysis_for_mesh,
                        extend_meshing_graph)
from .curvetop import CurveAnalysis, _count_open, _shrink, ypoly
from .errors import (AdjacencyMismatch, FactorizationRequired,
                     InternalInvariantViolation, MonotonicityViolated,
                     RegionNotRegular, SegregationFailed)
from .interval import Box, Interval, as_box, excludes_zero
from .ratpoly import (CTX, FactorList, Polynomial, Q, factorize,
                      flint_factor_hook, normalize, resultant, split_content,
                      square_free_part)
from .render import SCHEMA_VERSION, dump_json, shortest_decimal
from .rootiso import FiberPoint, LiftedRoot, RealAlgebraic, lift_roots, real_roots, upoly
from .surftop import (Site, _projection, _Region, _rational_point,
                      _render_z, _vertical_hook, lift_complex, orient_faces,
                      segregate_site)

__all__ = [
    "IrreducibleChain", "ExtremalData", "MeshingPolyhedron",
    "extremal_poly_surface", "decompose_spatial_curve", "chain_extremal_poly",
    "chain_planes", "extremal_data", "seg_box_sccs", "mpv3", "surface_mesh",
    "merge_meshes",
]

#: norm shifts tried when splitting a polynomial over an algebraic extension
_MAX_SHIFT = 20
#: halvings allowed while building the 2-D box of a regular curve vertex
_SITE_SHRINK = 60


# ---------------------------------------------------------------------------
# extremal polynomials
# ---------------------------------------------------------------------------

def extremal_poly_surface(factors) -> Polynomial:
    """``G_1 = prod_i Res(f_i, df_i/dx, z) * prod_i Res(f_i, df_i/dy, z)``
    over the factors ``f_i``, keeping only nonzero resultants.

    A resultant that vanishes although the derivative does not means the
    factor is reducible; with a partial factorization this raises
    :class:`FactorizationRequired`.

    >>> from certmesh.ratpoly import factorize, flint_factor_hook
    >>> print(extremal_poly_surface(factorize("x^2 + y^2 + z^2 - 1", flint_factor_hook)))
    16*x^2*y^2
    """
    if not isinstance(factors, FactorList):
        factors = factorize(factors)
    G1 = Polynomial(1)
    for fi, _m in factors:
        if fi.degree("z") < 1:
            continue
        for v in ("x", "y"):
            d = fi.diff(v)
            if d.is_zero():
                continue
            R = resultant(fi, d, "z")
            if R.is_zero():
                if factors.partial:
                    raise FactorizationRequired(
                        f"Res(f_i, df_i/d{v}, z) vanishes for the factor {fi}; "
                        "an irreducible factorization is needed")
                continue
            G1 = G1 * R
    return Polynomial(1) if G1.is_constant() else G1


# ---------------------------------------------------------------------------
# irreducible chains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IrreducibleChain:
    """A curve in space given by ``g(x, y) = f(x, y, z) = 0`` with
    ``deg(f, y) < deg(g, y)``.  ``partial`` marks chains whose
    irreducibility is not certified (no factorization hook)."""

    g: Polynomial
    f: Polynomial
    partial: bool = False

    @property
    def initials(self) -> tuple:
        return self.g.leading_coefficient("y"), self.f.leading_coefficient("z")


def _prem(A: Polynomial, B: Polynomial, var: str) -> Polynomial:
    """Pseudo-remainder of ``A`` by ``B`` in ``var``."""
    db = B.degree(var)
    lb = B.leading_coefficient(var)
    v = Polynomial.gen(var)
    while not A.is_zero() and A.degree(var) >= db:
        da = A.degree(var)
        A = lb * A - A.leading_coefficient(var) * v ** (da - db) * B
    return A


def _primitive(A: Polynomial) -> Polynomial:
    """``A`` divided by the gcd of its coefficients in ``z`` (a unit modulo
    an irreducible ``g``)."""
    if A.is_zero():
        return A
    c, p = split_content(A, ["x", "y"])
    return normalize(p)


def _kz_gcd(A: Polynomial, B: Polynomial, g: Polynomial) -> Polynomial:
    """gcd in ``K[z]`` with ``K = Q(x)[y]/(g)``, by pseudo-remainders with
    coefficients reduced modulo ``g``."""
    A = _primitive(_prem(A, g, "y"))
    B = _primitive(_prem(B, g, "y"))
    if A.degree("z") < B.degree("z"):
        A, B = B, A
    while not B.is_zero():
        if B.degree("z") == 0:
            return Polynomial(1)
        R = _prem(A, B, "z")
        R = _primitive(_prem(R, g, "y")) if not R.is_zero() else R
        A, B = B, R
    return A


def _shift_z(P: Polynomial, s) -> Polynomial:
    """``P(x, y, z + s y)``."""
    x, y, z = CTX.gens()
    return Polynomial(P.raw.compose(x, y, z + Q(s) * y))


def _split_over_curve(r: Polynomial, g: Polynomial, hook) -> list:
    """Factors of ``r`` in ``K[z]``, ``K = Q(x)[y]/(g)`` (Trager's norm
    method: shift ``z`` by a multiple of ``y`` until the norm is square-free,
    factor the norm over ``Q``, and take gcds with the shifted ``r``)."""
    if r.degree("y") == 0 or g.degree("y") == 1:
        if g.degree("y") == 1:
            return [r]
    for s in range(_MAX_SHIFT):
        rs = _prem(_shift_z(r, s), g, "y") if s else r
        N = resultant(g, rs, "y")
        if N.is_zero() or N.degree("z") < 1:
            continue
        dz = N.diff("z")
        if N.raw.gcd(dz.raw).degrees()[2] > 0:
            continue
        out = []
        for Nj, _m in factorize(N, hook):
            if Nj.degree("z") < 1:
                continue
            h = _kz_gcd(rs, Nj, g)
            if h.degree("z") < 1:
                continue
            h = _primitive(_prem(_shift_z(h, -s), g, "y")) if s else h
            out.append(h)
        if sum(h.degree("z") for h in out) != r.degree("z"):
            raise InternalInvariantViolation("factor degrees over the curve do not add up")
        return out
    raise InternalInvariantViolation("no square-free norm found while splitting a chain")


def decompose_spatial_curve(g, f, hook=flint_factor_hook) -> list:
    """Irreducible chains whose union is the curve ``g = f = 0``.

    ``g`` is factored, ``f`` is reduced modulo each factor ``g_i`` and
    split into irreducible factors over ``Q(x)[y]/(g_i)``.  Factors of
    ``g`` free of ``y`` are not chains and are skipped.  Without ``hook``
    (``hook=None``) no splitting over the extension takes place and the
    chains are flagged partial.

    >>> [(str(c.g), str(c.f)) for c in decompose_spatial_curve("y", "z*(x^2 + z^2 - 1)")]
    [('y', 'z'), ('y', 'x^2 + z^2 - 1')]
    >>> sorted(str(c.f) for c in decompose_spatial_curve("y^2 - x", "z^2 - x"))
    ['x + y*z', 'x - y*z']
    """
    g, f = Polynomial(g), Polynomial(f)
    partial = hook is None
    chains = []
    for gi, _m in factorize(g, hook):
        if gi.degree("y") < 1:
            continue
        for fj, _n in factorize(f, hook):
            if fj.degree("z") < 1:
                continue
            r = _prem(fj, gi, "y")
            if r.is_zero() or r.degree("z") < 1:
                continue
            r = _primitive(r)
            pieces = [r]
            if not partial:
                pieces = []
                for q, _k in factorize(r, hook):
                    if q.degree("z") >= 1:
                        pieces.extend(_split_over_curve(q, gi, hook))
            for h in pieces:
                chains.append(IrreducibleChain(gi, normalize(h), partial))
    chains.sort(key=lambda c: (c.g.expand_str(), c.f.total_degree(), c.f.expand_str()))
    return chains


def chain_extremal_poly(chain: IrreducibleChain) -> tuple:
    """``(T, I, planar)`` with ``T = Res(Res(h, f, z), g, y)``,
    ``h = f_x g_y - f_y g_x``, and ``I`` the product of the initials of
    ``g`` and ``f`` (the latter eliminated against ``g`` when it involves
    ``y``).  ``T = 0`` means the curve lies in horizontal planes.

    >>> T, I, planar = chain_extremal_poly(IrreducibleChain(Polynomial("y"), Polynomial("x^2 + z^2 - 1")))
    >>> print(T), planar
    4*x^2
    (None, False)
    """
    g, f = chain.g, chain.f
    h = f.diff("x") * g.diff("y") - f.diff("y") * g.diff("x")
    if h.is_zero():
        T = Polynomial(0)
    else:
        T = resultant(resultant(h, f, "z"), g, "y")
    planar = T.is_zero()
    if planar and chain.partial:
        raise FactorizationRequired(
            "deciding that a chain is planar needs an irreducible factorization")
    I1, I2 = chain.initials
    if I2.degree("y") > 0:
        I2 = resultant(I2, g, "y")
    return T, I1 * I2, planar


def chain_planes(chain: IrreducibleChain) -> list:
    """Heights ``z = c`` of the planes holding a planar chain.

    >>> [str(r.lo) for r in chain_planes(IrreducibleChain(Polynomial("y"), Polynomial("z")))]
    ['0']
    """
    E = resultant(chain.f, chain.g, "y")
    c, _ = split_content(E, ["z"])
    if c.is_constant():
        return []
    return real_roots(_zpoly(c), -_BIG, _BIG)


_BIG = Q(2) ** 64


def _zpoly(c: Polynomial) -> fmpq_poly:
    cs = {}
    for (i, j, k), v in c.terms.items():
        cs[k] = cs.get(k, 0) + v
    return fmpq_poly([cs.get(k, 0) for k in range(max(cs) + 1)])


@dataclass
class ExtremalData:
    """``G1`` and, per chain, ``T``, ``I`` and the planar flag."""

    G1: Polynomial
    chains: list
    T: list
    I: list
    planar: list

    def column_polys(self) -> list:
        """Univariate polynomials whose roots become extra critical columns."""
        out = []
        for T, I in zip(self.T, self.I):
            for p in (T, I):
                if not p.is_zero() and not p.is_constant():
                    out.append(upoly(p))
        return out


def extremal_data(f, G, hook=flint_factor_hook) -> ExtremalData:
    """Extremal polynomials of the surface ``f`` above the curve ``G``."""
    f, G = Polynomial(f), Polynomial(G)
    factors = factorize(f, hook)
    G1 = extremal_poly_surface(factors)
    chains, Ts, Is, flags = [], [], [], []
    Gm = G if G1.is_constant() else square_free_part(G * G1)
    for fj, _m in factors:
        for ch in decompose_spatial_curve(Gm, fj, hook):
            T, I, planar = chain_extremal_poly(ch)
            chains.append(ch)
            Ts.append(T)
            Is.append(I)
            flags.append(planar)
    return ExtremalData(G1, chains, Ts, Is, flags)


# ---------------------------------------------------------------------------
# clusters of sheets over a planar box
# ---------------------------------------------------------------------------

#: ways of sharing the free height of a cluster between its two walls
_WALL_SPLITS = (Q(1) / 2, Q(1) / 4, Q(3) / 4)


def _wall_free(f: Polynomial, B: Box, w) -> bool:
    return excludes_zero(f, Box(list(B.dims) + [Interval(w)]))


def _clusters(f: Polynomial, B: Box, roots: list, Z1, Z2, eps) -> list | None:
    """Group the sheets through ``roots`` (bottom-up, above a point of
    ``B``) into runs enclosed by certified walls at most ``eps`` apart.
    Returns ``[(w_lo, w_hi, first, last)]`` or ``None``."""
    m = len(roots)
    for r in roots:
        while r.hi - r.lo > eps / 16:
            r.refine_once()
    out = []
    i = 0
    while i < m:
        for k in range(i, m):
            lo, hi = roots[i].lo, roots[k].hi
            if hi - lo >= eps:
                return None
            slack = eps - (hi - lo)
            lo_lim = Z1 if i == 0 else (roots[i - 1].hi + roots[i].lo) / 2
            hi_lim = Z2 if k == m - 1 else (roots[k].hi + roots[k + 1].lo) / 2
            found = None
            for q in _WALL_SPLITS:
                wlo = max(lo - q * slack, lo_lim)
                whi = min(hi + (1 - q) * slack, hi_lim)
                ok_lo = (i == 0 and wlo == Z1) or _wall_free(f, B, wlo)
                if ok_lo and ((k == m - 1 and whi == Z2) or _wall_free(f, B, whi)):
                    found = (wlo, whi, i, k)
                    break
            if found is not None:
                out.append(found)
                i = k + 1
                break
        else:
            return None
    return out


def _roots_at(f, x, y, Z1, Z2) -> list:
    return lift_roots(_rational_point(x, y), f, Z1, Z2)


class _ClusterTest:
    """Acceptance test for a planar leaf: clusters for each component of
    the leaf minus the curve, represented by the sign of ``G`` at corners."""

    def __init__(self, f: Polynomial, G: Polynomial, Z1, Z2, eps):
        self.f, self.G = f, G
        self.Z1, self.Z2 = Z1, Z2
        self.eps = eps

    def __call__(self, leaf: NiceBox) -> bool:
        data = {}
        for x, y in sorted(_corners(leaf.box)):
            s = _sign(_val(self.G, x, y))
            if s == 0 or s in data:
                continue
            cl = _clusters(self.f, leaf.box, _roots_at(self.f, x, y, self.Z1, self.Z2),
                           self.Z1, self.Z2, self.eps)
            if cl is None:
                return False
            data[s] = cl
        leaf.data = data
        return True


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def seg_box_sccs(f, g, B3, Be: NiceBox, eps) -> tuple:
    """Segregating boxes for the curve segments of the surface above the
    curve piece of a nice planar box ``Be``.

    Returns ``([Be.box], boxes)``: each 3-D box ``Be x [w_lo, w_hi]`` has
    ``f`` certified nonzero on its top and bottom (unless they are the box
    ends ``Z1``/``Z2``), length at most ``eps``, and holds the sheets that
    meet above the curve between its walls.  The numbers of segments
    reaching the two crossings of ``Be`` agree.

    >>> from certmesh.interval import Box
    >>> B = NiceBox(Box.from_pairs([(0, "1/8"), ("-1/16", "1/16")]), "nice")
    >>> _, boxes = seg_box_sccs("z - x", "y - x", "[-1,1]x[-1,1]x[-1,1]", B, "1/4")
    >>> [str(b[2]) for b in boxes]
    ['Interval(-1/16, 3/16)']
    """
    f, g = Polynomial(f), Polynomial(g)
    B3 = as_box(B3)
    Z1, Z2 = B3[2].lo, B3[2].hi
    eps = Q(eps)
    lines = _Lines(g, Box(B3.dims[:2]))
    pts = []
    for axis, t, lo, hi in _side_pairs(Be.box):
        for c in lines.on_segment(axis, t, lo, hi):
            pts.append(c.point())
    counts = set()
    out = []
    B = Be.box
    for fp in pts:
        roots = lift_roots(fp.copy(), f, Z1, Z2)
        counts.add(len(roots))
        cl = _clusters(f, B, roots, Z1, Z2, eps)
        if cl is None:
            raise MonotonicityViolated(
                "the curve segments above the box cannot be separated by certified walls")
        for wlo, whi, _i, _k in cl:
            box = Box(list(B.dims) + [Interval(wlo, whi)])
            if box not in out:
                out.append(box)
    if len(counts) > 1:
        raise MonotonicityViolated("different numbers of segments at the two crossings")
    return [B], out


def _side_pairs(B: Box) -> list:
    return [(0, B[0].lo, B[1].lo, B[1].hi), (0, B[0].hi, B[1].lo, B[1].hi),
            (1, B[1].lo, B[0].lo, B[0].hi), (1, B[1].hi, B[0].lo, B[0].hi)]


# ---------------------------------------------------------------------------
# the meshing polyhedron
# ---------------------------------------------------------------------------

@dataclass
class MeshingPolyhedron:
    """Points, edges and triangular faces approximating a surface, with a
    certifying box per face.

    ``keys[i]`` identifies point ``i`` across meshes that are merged;
    ``face_box[k]`` contains face ``k`` and the surface patch it stands for;
    ``on_boundary[i]`` lists the faces of the bounding box (as
    ``(axis, value)``) that point ``i`` lies on exactly.
    """

    box: Box
    eps: fmpq
    points: list = field(default_factory=list)
    keys: list = field(default_factory=list)
    point_boxes: list = field(default_factory=list)
    on_boundary: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    faces: list = field(default_factory=list)
    face_box: list = field(default_factory=list)
    part: str = ""
    surface: Polynomial | None = None
    audit: dict = field(default_factory=dict)
    #: the separately meshed singular and smooth parts (merged meshes only)
    parts: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def boxes(self) -> list:
        seen, out = set(), []
        for B in self.face_box:
            k = repr(B)
            if k not in seen:
                seen.add(k)
                out.append(B)
        return out

    def euler_characteristic(self) -> int:
        return len(self.points) - len(self.edges) + len(self.faces)

    def num_components(self) -> int:
        parent = list(range(len(self.points)))

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for i, j in self.edges:
            parent[find(i)] = find(j)
        for a, b, c in self.faces:
            parent[find(a)] = find(b)
            parent[find(a)] = find(c)
        return len({find(v) for v in range(len(self.points))})

    def edge_face_counts(self) -> dict:
        cnt = {frozenset(e): 0 for e in self.edges}
        for a, b, c in self.faces:
            for e in ((a, b), (b, c), (c, a)):
                k = frozenset(e)
                cnt[k] = cnt.get(k, 0) + 1
        return cnt

    def is_boundary_edge(self, e) -> bool:
        i, j = tuple(e)
        return bool(set(self.on_boundary[i]) & set(self.on_boundary[j]))

    def is_watertight(self) -> bool:
        """Interior edges bound exactly two faces, edges on the box
        boundary exactly one (edges of no face are not counted)."""
        for e, n in self.edge_face_counts().items():
            if n == 0:
                continue
            if n != (1 if self.is_boundary_edge(e) else 2):
                return False
        return True

    def is_closed(self) -> bool:
        return all(n == 2 for n in self.edge_face_counts().values())

    def check_boxes(self) -> bool:
        """Every certifying box has length at most ``eps`` and contains the
        exact boxes of the three points of its face."""
        for (a, b, c), B in zip(self.faces, self.face_box):
            if B.length > self.eps:
                return False
            if not all(B.contains(self.point_boxes[v]) for v in (a, b, c)):
                return False
        return True

    def to_obj(self) -> str:
        out = [f"# meshing polyhedron, eps {self.eps}",
               f"# box {self.box}",
               f"# V {len(self.points)} E {len(self.edges)} F {len(self.faces)}"]
        for p in self.points:
            out.append("v " + " ".join(f"{float(c):.9g}" for c in p))
        for t in orient_faces(self.faces):
            out.append("f " + " ".join(str(i + 1) for i in t))
        in_face = set()
        for a, b, c in self.faces:
            in_face.update(frozenset(e) for e in ((a, b), (b, c), (c, a)))
        for i, j in self.edges:
            if frozenset((i, j)) not in in_face:
                out.append(f"l {i + 1} {j + 1}")
        return "\n".join(out) + "\n"

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "type": "meshing-polyhedron",
            "surface": self.surface.expand_str() if self.surface is not None else None,
            "box": self.box.to_json(),
            "eps": str(self.eps),
            "points": [{"position": [shortest_decimal(c, B[i].lo, B[i].hi)
                                     for i, c in enumerate(p)],
                        "box": B.to_json()}
                       for p, B in zip(self.points, self.point_boxes)],
            "edges": [list(e) for e in self.edges],
            "faces": [{"points": list(t), "box": B.to_json()}
                      for t, B in zip(self.faces, self.face_box)],
            "euler_characteristic": self.euler_characteristic(),
            "components": self.num_components(),
            "watertight": self.is_watertight(),
            "audit": self.audit,
        }

    def to_json(self) -> str:
        return dump_json(self.to_dict())


def merge_meshes(M1: MeshingPolyhedron, M2: MeshingPolyhedron) -> MeshingPolyhedron:
    """Join two meshes along their common points (identified by key).

    Along an edge present in both meshes the surface continues from one
    part into the other, so both must attach the same number of faces to
    it (one per sheet through the edge); otherwise
    :class:`AdjacencyMismatch` is raised.

    >>> M = MeshingPolyhedron(Box.from_pairs([(0, 1)] * 3), Q(1))
    >>> merge_meshes(M, M).points
    []
    """
    if not M1.points:
        return M2
    if not M2.points:
        return M1
    out = MeshingPolyhedron(M1.box, max(M1.eps, M2.eps), part="merged",
                            surface=M1.surface)
    index = {}

    def add(M, i):
        k = M.keys[i]
        if k not in index:
            index[k] = len(out.points)
            out.points.append(M.points[i])
            out.keys.append(k)
            out.point_boxes.append(M.point_boxes[i])
            out.on_boundary.append(M.on_boundary[i])
        return index[k]

    side_counts = []
    seen = set()
    for M in (M1, M2):
        ids = [add(M, i) for i in range(len(M.points))]
        for i, j in M.edges:
            e = frozenset((ids[i], ids[j]))
            if e not in seen:
                seen.add(e)
                out.edges.append((ids[i], ids[j]))
        for (a, b, c), B in zip(M.faces, M.face_box):
            out.faces.append((ids[a], ids[b], ids[c]))
            out.face_box.append(B)
        side_counts.append({frozenset(ids[v] for v in e): n
                            for e, n in M.edge_face_counts().items()})
    c1, c2 = side_counts
    for e in c1.keys() & c2.keys():
        if c1[e] != c2[e]:
            raise AdjacencyMismatch(
                f"an edge shared by both meshes bounds {c1[e]} faces on one side "
                f"and {c2[e]} on the other")
    return out


# ---------------------------------------------------------------------------
# 2-D boxes of curve vertices
# ---------------------------------------------------------------------------

class _PointRegion(_Region):
    """Segregating box of a column point; shrinking narrows the shared
    column and the point's own interval, keeping its branch numbers."""

    def __init__(self, ca: CurveAnalysis, col, k: int, c, d, L: int, R: int):
        self.ca, self.col, self.k = ca, col, k
        fp, on_gv = col._fibre[k]
        self.on_gv = on_gv
        self.fp = None if fp.lo == fp.hi else fp.copy()
        self.r = fp.lo if fp.lo == fp.hi else None
        self.c, self.d = c, d
        self.L, self.R = L, R
        at = col.alpha.lo if col.alpha.is_rational() else None
        self.has_left = at is None or col.a != at
        self.has_right = at is None or col.b != at
        self.pin_lo = self.r is not None and self.r == ca.Y1
        self.pin_hi = self.r is not None and self.r == ca.Y2

    def box(self) -> Box:
        return Box.from_pairs([(self.col.a, self.col.b), (self.c, self.d)])

    def shrink_x(self):
        col = self.col
        col.a, col.b = _shrink(col.alpha, col.a, col.b, self.ca.X1, self.ca.X2)

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
        gv, col = self.ca.gv, self.col
        if gv.degree("y") < 1:
            return True
        for yv, pinned in ((self.c, self.pin_lo), (self.d, self.pin_hi)):
            if pinned:
                continue
            if not excludes_zero(gv, Box.from_pairs([(col.a, col.b), (yv, yv)])):
                return False
        if self.has_left and _count_open(ypoly(gv, col.a), self.c, self.d) != self.L:
            return False
        if self.has_right and _count_open(ypoly(gv, col.b), self.c, self.d) != self.R:
            return False
        return True


def _column_sites(f, ca: CurveAnalysis, Z1, Z2, eps) -> dict:
    """3-D segregated boxes of all column points; the columns and point
    intervals are shrunk in place so that the final planar boxes are the
    site boxes."""
    sites = {}
    for ci, col in enumerate(ca.columns):
        rows = column_rows(ca, col, eps)
        regions = []
        for k, (fp, _on, c, d, L, R) in enumerate(rows):
            reg = _PointRegion(ca, col, k, c, d, L, R)
            site = segregate_site(f, Z1, Z2, fp, reg, hmax=eps)
            regions.append((reg, site))
        for k, (reg, site) in enumerate(regions):
            col._ivs[k] = (reg.c, reg.d)
            sites[(ci, k)] = site
        for k, (reg, site) in enumerate(regions):
            site.box2 = reg.box()
            if not site.certified():
                raise InternalInvariantViolation("a shrunk site lost its certificate")
    return sites


class _CrossRegion(_Region):
    """Box around a regular curve vertex on a grid line: thin across the
    line, and along it bounded by curve-free walls; exactly one curve
    crossing on each of the two sides parallel to the line."""

    def __init__(self, G: Polynomial, cr: _Crossing, lo, hi, delta):
        self.G = G
        self.cr = cr
        self.axis, self.t = cr.axis, cr.t
        self.lo, self.hi = lo, hi
        self.delta = delta
        self._side = {}

    def box(self) -> Box:
        across = (self.t - self.delta, self.t + self.delta)
        along = (self.lo, self.hi)
        return Box.from_pairs([across, along] if self.axis == 0 else [along, across])

    def shrink_x(self):
        self.delta /= 2
        self._side = {}

    def shrink(self):
        self.shrink_x()
        cr = self.cr
        if cr.exact:
            r = cr.lo
            self.lo, self.hi = (self.lo + r) / 2, (self.hi + r) / 2
        else:
            cr.refine_once()
            if cr.exact:
                r = cr.lo
                self.lo, self.hi = (self.lo + r) / 2, (self.hi + r) / 2
            else:
                self.lo, self.hi = cr.lo, cr.hi

    def _seg(self, along, side=None) -> Box:
        across = (self.t - self.delta, self.t + self.delta) if side is None else (side, side)
        along = (along, along) if not isinstance(along, tuple) else along
        return Box.from_pairs([across, along] if self.axis == 0 else [along, across])

    def side_roots(self, sgn: int) -> list:
        if sgn not in self._side:
            s = self.t + sgn * self.delta
            p = ypoly(self.G, s) if self.axis == 0 else upoly(self.G.subs({"y": s}))
            if p.is_zero():
                self._side[sgn] = None
            else:
                self._side[sgn] = [(a, b) for a, b in _isolate(p, self.lo, self.hi)
                                   if self.lo < b and a < self.hi]
        return self._side[sgn]

    def ok2d(self) -> bool:
        for w in (self.lo, self.hi):
            if not excludes_zero(self.G, self._seg(w)):
                return False
        for sgn in (-1, 1):
            rs = self.side_roots(sgn)
            if rs is None or len(rs) != 1:
                return False
        return True

    def point(self, along, across_sign: int) -> FiberPoint:
        s = self.t + across_sign * self.delta
        return _rational_point(s, along) if self.axis == 0 else _rational_point(along, s)

    def gap_points(self, sgn: int) -> tuple:
        (a, b), = self.side_roots(sgn)
        return self.point((self.lo + a) / 2, sgn), self.point((b + self.hi) / 2, sgn)


class _ExactCrossing:
    """A curve vertex at a rational point on a side of its regions."""

    exact = True

    def __init__(self, point: tuple, regions: list):
        for axis in (0, 1):
            t, u = point[axis], point[1 - axis]
            if any(t in (r.box[axis].lo, r.box[axis].hi) and
                   r.box[1 - axis].lo < u < r.box[1 - axis].hi for r in regions):
                self.axis, self.t, self.lo = axis, t, u
                self.hi = u
                return
        raise InternalInvariantViolation("a crossing vertex on no region side")

    def refine_once(self):
        pass


def _isolate(p, lo, hi) -> list:
    from .rootiso import isolate_real_roots
    return isolate_real_roots(p, lo, hi)


class _LineRegion(_Region):
    """Small box around a point ``(alpha, y)`` of a vertical line of the
    curve, free of the rest of the curve."""

    def __init__(self, gv: Polynomial, alpha, y, delta, eta):
        self.gv, self.alpha, self.y = gv, alpha, y
        self.delta, self.eta = delta, eta

    def box(self) -> Box:
        return Box.from_pairs([(self.alpha - self.delta, self.alpha + self.delta),
                               (self.y - self.eta, self.y + self.eta)])

    def shrink(self):
        self.delta /= 2
        self.eta /= 2

    def ok2d(self) -> bool:
        return self.gv.degree("y") < 1 or excludes_zero(self.gv, self.box())


# ---------------------------------------------------------------------------
# the surface mesh
# ---------------------------------------------------------------------------

class _SurfaceMesher:
    def __init__(self, f, B3, eps, hook):
        proj = _projection(f, B3)
        self.f, self.G0, self.B3 = proj.f, proj.G, proj.B3
        self.Z1, self.Z2 = self.B3[2].lo, self.B3[2].hi
        self.B2 = Box(self.B3.dims[:2])
        self.eps = Q(eps)
        self.extremal = extremal_data(self.f, self.G0, hook)
        G1 = self.extremal.G1
        self.columns = self.extremal.column_polys()
        if not G1.is_constant():
            # vertical lines of G1 become columns rather than curve components
            lines, G1 = split_content(G1, ["x"])
            if not lines.is_constant():
                self.columns.append(upoly(lines))
        self.G = self.G0 if G1.is_constant() else square_free_part(self.G0 * G1)

    def run(self) -> MeshingPolyhedron:
        f, Z1, Z2, eps = self.f, self.Z1, self.Z2, self.eps
        ca = curve_analysis_for_mesh(self.G, self.B2, eps,
                                     extra_columns=self.columns,
                                     vertical_hook=_vertical_hook(f, Z1, Z2))
        self.ca = ca
        col_sites = _column_sites(f, ca, Z1, Z2, eps)
        test = _ClusterTest(f, ca.g, Z1, Z2, eps)
        D = PlanarDecomposition(ca, eps, accept=test, tile=True)
        E = extend_meshing_graph(ca.g, D.singular_part, D.smooth_part)
        self.D, self.E = D, E
        V = E.vertices
        n = len(V)
        # regions around each vertex
        around: dict = {}
        for ri, r in enumerate(E.regions):
            for v in r.polygon:
                around.setdefault(v, []).append(ri)
        crit_site = {}
        for r in E.regions:
            if r.kind == "critical":
                ci, k = V[r.vertex].key[1], V[r.vertex].key[2]
                crit_site[r.vertex] = (col_sites[(ci, k)], r)
        sites: list = [None] * n
        self.cross_regions: dict = {}
        self.line_regions: dict = {}
        regular = [False] * n
        for v in V:
            if not v.on_curve:
                continue
            if v.kind == "critical":
                sites[v.index] = crit_site[v.index][0]
            elif v.kind == "crossing":
                sites[v.index] = self._cross_site(v, [E.regions[i] for i in around[v.index]])
                regular[v.index] = True
            elif v.kind == "line":
                sites[v.index] = self._line_site(v, [E.regions[i] for i in around.get(v.index, [])])
                regular[v.index] = True
            else:
                raise InternalInvariantViolation(f"unexpected curve vertex kind {v.kind}")
        self.crit_site = crit_site
        fibres = [v.fiber() for v in V]
        curve_edges = [c for a, b, c in E.tri_edges]
        edges = [(a, b, c) for a, b, c in E.tri_edges]
        lift = lift_complex(f, Z1, Z2, fibres, sites, regular, edges, E.cells, self._witness)
        return self._assemble(lift, sites)

    def audit(self) -> dict:
        """Extremal polynomials, chains and planar certificate counts."""
        X = self.extremal
        chains = []
        for ch, T, I, planar in zip(X.chains, X.T, X.I, X.planar):
            doc = {"g": ch.g.expand_str(), "f": ch.f.expand_str(), "partial": ch.partial,
                   "T": T.expand_str(), "I": I.expand_str(), "planar": planar}
            if planar:
                doc["planes"] = [[str(r.lo), str(r.hi)] for r in chain_planes(ch)]
            chains.append(doc)
        kinds: dict = {}
        for r in self.E.regions:
            kinds[r.kind] = kinds.get(r.kind, 0) + 1
        return {
            "projection_curve": self.G0.expand_str(),
            "G1": X.G1.expand_str(),
            "mesh_curve": self.G.expand_str(),
            "extra_columns": [str(p) for p in self.columns],
            "chains": chains,
            "planar_regions": dict(sorted(kinds.items())),
            "columns": len(self.ca.columns),
        }

    # sites of regular vertices -------------------------------------------------------
    def _cross_site(self, v, regions: list) -> Site:
        cr = v.crossing
        if cr is None:
            cr = _ExactCrossing(v.exact, regions)
        axis, t = cr.axis, cr.t
        along = 1 - axis
        lo_lim = max(r.box[along].lo for r in regions)
        hi_lim = min(r.box[along].hi for r in regions)
        width = min(r.box[axis].width for r in regions)
        while not (lo_lim < cr.lo and cr.hi < hi_lim):
            cr.refine_once()
        if cr.exact:
            r0 = cr.lo
            w = min(r0 - lo_lim, hi_lim - r0) / 2
            lo, hi = r0 - w, r0 + w
        else:
            lo, hi = cr.lo, cr.hi
        reg = _CrossRegion(self.ca.g, cr, lo, hi, width / 4)
        site = segregate_site(self.f, self.Z1, self.Z2, v.fiber(), reg)
        self.cross_regions[v.index] = reg
        return site

    def _line_site(self, v, regions: list) -> Site:
        x, y = v.exact
        ca = self.ca
        col = next(c for c in ca.columns if c.vertical and c.alpha.is_rational()
                   and c.alpha.lo == x)
        delta = min(w for w in (x - col.a, col.b - x) if w > 0) / 2
        eta = self.eps / 4
        for fp, _on in col._fibre:
            if fp.lo <= y <= fp.hi:
                raise InternalInvariantViolation("a line vertex meets a column point")
            eta = min(eta, (y - fp.hi) / 2 if fp.hi < y else (fp.lo - y) / 2)
        reg = _LineRegion(ca.gv, x, y, delta, eta)
        site = segregate_site(self.f, self.Z1, self.Z2, v.fiber(), reg)
        self.line_regions[v.index] = reg
        return site

    # witnesses -------------------------------------------------------------------------
    def _witness(self, u: int, w: int) -> FiberPoint:
        V = self.E.vertices
        vu, vw = V[u], V[w]
        if vu.kind == "critical":
            return vw.fiber()
        if vu.kind == "crossing":
            reg = self.cross_regions[u]
            axis = reg.axis
            along = 1 - axis
            wl, wh = vw.interval(axis)
            if wl == wh == reg.t:
                # along the grid line: the curve-free wall on that side
                up = vw.interval(along)[0] > vu.interval(along)[1]
                return reg.point(reg.hi if up else reg.lo, 0)
            sgn = 1 if wl > reg.t else -1
            target = _sign(_val(self.ca.g, *vw.position)) if not vw.on_curve else None
            if target is None:
                raise InternalInvariantViolation("a non-curve edge between two curve points")
            for p in reg.gap_points(sgn):
                if _sign(_val(self.ca.g, p.alpha.lo, p.lo)) == target:
                    return p
            raise InternalInvariantViolation("no witness on the side of the cell")
        if vu.kind == "line":
            reg = self.line_regions[u]
            wx = vw.position[0]
            sgn = 1 if wx > reg.alpha else -1
            return _rational_point(reg.alpha + sgn * reg.delta, reg.y)
        raise InternalInvariantViolation("witness requested at an off-curve vertex")

    # assembly ---------------------------------------------------------------------------
    def _assemble(self, lift, sites) -> MeshingPolyhedron:
        E, V = self.E, self.E.vertices
        B3, eps = self.B3, self.eps
        X = (B3[0].lo, B3[0].hi)
        Y = (B3[1].lo, B3[1].hi)
        pos, pboxes, tags, keys = [], [], [], []
        for lp in lift.points:
            vert = V[lp.vertex]
            r = lp.root
            x, y = vert.position
            pos.append((x, y, _render_z(r)))
            xl, xh = vert.interval(0)
            yl, yh = vert.interval(1)
            pboxes.append(Box.from_pairs([(xl, xh), (yl, yh), (r.lo, r.hi)]))
            t = []
            if xl == xh and xl in X:
                t.append((0, xl))
            if yl == yh and yl in Y:
                t.append((1, yl))
            if r.lo == r.hi and r.lo in (self.Z1, self.Z2):
                t.append((2, r.lo))
            tags.append(tuple(t))
            keys.append((vert.key, lp.rank))
        parts = {"singular": MeshingPolyhedron(B3, eps, part="singular", surface=self.f),
                 "smooth": MeshingPolyhedron(B3, eps, part="smooth", surface=self.f)}
        local = {name: {} for name in parts}

        def pid(name, i):
            M = parts[name]
            d = local[name]
            if i not in d:
                d[i] = len(M.points)
                M.points.append(pos[i])
                M.keys.append(keys[i])
                M.point_boxes.append(pboxes[i])
                M.on_boundary.append(tags[i])
            return d[i]

        face_part = {}
        for i, j, k, c, tri in lift.faces:
            r = E.regions[E.cell_region[c]]
            name = "singular" if r.column is not None else "smooth"
            box = self._face_box(r, lift, (i, j, k))
            for p in (i, j, k):
                self._settle(pboxes, lift.points[p].root, box, p)
            M = parts[name]
            M.faces.append((pid(name, i), pid(name, j), pid(name, k)))
            M.face_box.append(box)
            for e in tri:
                face_part.setdefault(e, set()).add(name)
        # lifted edges: with their faces, or with the part of their planar edge
        for idx, (i, j, e2, _s) in enumerate(lift.edges):
            names = face_part.get(idx)
            if not names:
                a, b, _c = E.tri_edges[e2]
                names = {"singular" if any(E.regions[E.cell_region[c]].column is not None
                                           for c in self._cells_of(e2)) else "smooth"}
            for name in names:
                parts[name].edges.append((pid(name, i), pid(name, j)))
        for v, ids in enumerate(lift.by_vertex):
            for i in ids:
                if not any(i in local[n] for n in parts):
                    pid("singular", i)
        for name, M in parts.items():
            back = {q: i for i, q in local[name].items()}
            M.point_boxes = [pboxes[back[q]] for q in range(len(M.points))]
        merged = merge_meshes(parts["singular"], parts["smooth"])
        if merged is parts["smooth"] or merged is parts["singular"]:
            merged = dataclasses.replace(merged)
        merged.part = "merged"
        merged.surface = self.f
        merged.audit = self.audit()
        merged.parts = parts
        self.parts = parts
        return merged

    def _cells_of(self, e2: int) -> list:
        if not hasattr(self, "_cell_index"):
            idx = {}
            ids = {frozenset((a, b)): k for k, (a, b, _c) in enumerate(self.E.tri_edges)}
            for c, (a, b, d) in enumerate(self.E.cells):
                for p, q in ((a, b), (b, d), (d, a)):
                    idx.setdefault(ids[frozenset((p, q))], []).append(c)
            self._cell_index = idx
        return self._cell_index.get(e2, [])

    def _face_box(self, r, lift, tri) -> Box:
        if r.kind == "critical":
            site, _r = self.crit_site[r.vertex]
            lp = next(lift.points[p] for p in tri if lift.points[p].vertex == r.vertex)
            e, f_ = site.slabs[lp.rank]
            return Box(list(r.box.dims) + [Interval(e, f_)])
        apex = lift.points[tri[0]]
        n = apex.vertex
        vert = self.E.vertices[n]
        data = r.leaf.data if r.leaf is not None else None
        if data is None:
            raise InternalInvariantViolation("a planar piece has no cluster data")
        s = _sign(_val(self.ca.g, *vert.position))
        clusters = data.get(s)
        if clusters is None:
            raise InternalInvariantViolation("no clusters for the side of an apex")
        root = apex.root.copy()
        for _ in range(400):
            for wlo, whi, _i, _k in clusters:
                if wlo <= root.lo and root.hi <= whi:
                    return Box(list(r.box.dims) + [Interval(wlo, whi)])
            root.refine_once()
        raise InternalInvariantViolation("a sheet lies outside every cluster")

    @staticmethod
    def _settle(pboxes, root: LiftedRoot, box: Box, p: int):
        """Refine the exact box of a lifted point until it fits in the
        certifying box of a face through it."""
        b = pboxes[p]
        if box.contains(b):
            return
        r = root.copy()
        for _ in range(400):
            nb = Box(list(b.dims[:2]) + [Interval(r.lo, r.hi)])
            if box.contains(nb):
                pboxes[p] = nb
                return
            r.refine_once()


def surface_mesh(f, B3, eps, hook=flint_factor_hook) -> MeshingPolyhedron:
    """Certified ``eps``-mesh of ``f = 0`` in ``B3``.

    ``hook`` factors polynomials over Q (default: FLINT); ``None`` uses the
    partial square-free split, which may raise
    :class:`FactorizationRequired`.  The singular part (columns) and the
    smooth part (strips) are meshed separately and merged.
    """
    return _SurfaceMesher(f, B3, eps, hook).run()


def mpv3(f, region: Sequence, eps) -> MeshingPolyhedron:
    """Mesh the surface above planar boxes free of its projection curve.

    Each box of ``region`` is subdivided until, over every leaf, the sheets
    can be enclosed in certified walls at most ``eps`` apart; leaves are
    triangulated conformingly and lifted sheet by sheet.

    >>> M = mpv3("z - x", [Box.from_pairs([(0, "1/2"), (0, "1/2")])], "1/4")
    >>> M.euler_characteristic(), M.check_boxes(), len(M.faces) > 0
    (1, True, True)
    """
    f = Polynomial(f)
    region = [B if isinstance(B, Box) else Box(B) for B in region]
    eps = Q(eps)
    lo = [min(B[i].lo for B in region) for i in range(2)]
    hi = [max(B[i].hi for B in region) for i in range(2)]
    # a z-range holding every sheet above the region
    span = _z_bound(f, Box.from_pairs(list(zip(lo, hi))))
    B3 = Box.from_pairs([(lo[0], hi[0]), (lo[1], hi[1]), span])
    Z1, Z2 = span
    test = _ClusterTest(f, Polynomial(1), Z1, Z2, eps)
    lines = _Lines(Polynomial(1), Box(B3.dims[:2]))
    sub = _Subdivider(Polynomial(1), lines, eps, test)
    regions = []
    holder = _Holder(Polynomial(1), Box(B3.dims[:2]), eps)
    for B in region:
        for leaf in sub.run(B, known_empty=True):
            regions.append(_LeafRegion(leaf, holder))
    E = _Tiler(holder, regions).run()
    n = len(E.vertices)
    fibres = [v.fiber() for v in E.vertices]
    lift = lift_complex(f, Z1, Z2, fibres, [None] * n, [False] * n,
                        [(a, b, c) for a, b, c in E.tri_edges], E.cells, None)
    M = MeshingPolyhedron(B3, eps, part="smooth", surface=f)
    for lp in lift.points:
        vert = E.vertices[lp.vertex]
        x, y = vert.position
        M.points.append((x, y, _render_z(lp.root)))
        M.keys.append((vert.key, lp.rank))
        M.point_boxes.append(Box.from_pairs([(x, x), (y, y), (lp.root.lo, lp.root.hi)]))
        M.on_boundary.append(())
    for i, j, _e, _s in lift.edges:
        M.edges.append((i, j))
    for i, j, k, c, _tri in lift.faces:
        r = E.regions[E.cell_region[c]]
        root = lift.points[i].root.copy()
        box = None
        for _ in range(400):
            for wlo, whi, _a, _b in r.leaf.data[_sign(1)]:
                if wlo <= root.lo and root.hi <= whi:
                    box = Box(list(r.box.dims) + [Interval(wlo, whi)])
            if box is not None:
                break
            root.refine_once()
        if box is None:
            raise InternalInvariantViolation("a sheet lies outside every cluster")
        M.faces.append((i, j, k))
        M.face_box.append(box)
        for p in (i, j, k):
            _SurfaceMesher._settle(M.point_boxes, lift.points[p].root, box, p)
    return M


def _z_bound(f: Polynomial, B2: Box) -> tuple:
    """A z-interval containing every real zero of ``f`` above ``B2``
    (Cauchy bound with the leading coefficient bounded away from zero)."""
    lc = f.leading_coefficient("z")
    from .interval import box_eval
    lc_iv = box_eval(lc, Box(list(B2.dims) + [Interval(0)]))
    if not lc_iv.excludes_zero():
        raise RegionNotRegular("the leading coefficient in z vanishes above the region")
    m = min(abs(lc_iv.lo), abs(lc_iv.hi))
    bound = Q(0)
    for c in f.coefficients("z")[:-1]:
        iv = box_eval(c, Box(list(B2.dims) + [Interval(0)]))
        bound = max(bound, max(abs(iv.lo), abs(iv.hi)) / m)
    return (-(bound + 1), bound + 1)


class _Holder:
    """The parts of a decomposition a tiler needs, for a curve-free region."""

    def __init__(self, g, B2, eps):
        from .curvemesh import MeshingGraph
        self.g = g
        self.eps = eps
        self.tile = True
        self._line_columns = {}
        self.mesh = MeshingGraph(g, B2, eps)


class _LeafRegion:
    def __init__(self, leaf, owner):
        self.kind = "empty"
        self.box = leaf.box
        self.leaf = leaf
        self.vertex = None
        self.column = None
        self.apexes = ()
        self.polygon = ()
        self._owner = owner
