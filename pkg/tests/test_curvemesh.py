import random
from fractions import Fraction

import pytest
import sympy

from certmesh.curvemesh import (PlanarDecomposition, curve_analysis_for_mesh, curve_mesh,
                                extend_meshing_graph, mpv2, y_extremal_poly)
from certmesh.interval import Box
from certmesh.ratpoly import Q
from corpus import CURVE_BOX, CURVES
from oracles import F, X, Y, sym, within_eps


def _side_crossings(g, B):
    """Boundary points of ``B`` on the curve (sympy root counting; a corner
    is counted once)."""
    e = sym(g)
    (a, b), (c, d) = [(sympy.Rational(str(I.lo)), sympy.Rational(str(I.hi))) for I in B]
    n = 0
    for fixed, var, lo, hi, other in ((X, Y, c, d, a), (X, Y, c, d, b),
                                      (Y, X, a, b, c), (Y, X, a, b, d)):
        s = sympy.expand(e.subs(fixed, other))
        if s == 0:
            return None
        P = sympy.Poly(s, var)
        if P.degree() > 0:
            n += P.count_roots(lo, hi)
    corners = sum(1 for u in (a, b) for v in (c, d) if e.subs({X: u, Y: v}) == 0)
    return n - corners


def test_mpv2_diagonal_line():
    M = mpv2("y - x", [Box.from_pairs([(0, 1), (0, 1)])], "1/4")
    assert M.edges and M.check_boxes()
    assert (M.num_components(), M.num_cycles()) == (1, 0)
    for v in M.vertices:
        x, y = v.position
        assert x == y


def test_mpv2_parabola_boxes_are_nice():
    g = "y - x^2"
    M = mpv2(g, [Box.from_pairs([(-1, 1), (0, 1)])], "1/8")
    assert M.check_boxes()
    for leaf in M.leaves:
        assert leaf.box.length <= Q("1/8")
        n = _side_crossings(g, leaf.box)
        assert n == (2 if leaf.kind == "nice" else 0)


def test_mpv2_empty_region():
    M = mpv2("x^2 + y^2 + 1", [Box.from_pairs([(0, 1), (0, 1)])], "1/4")
    assert not M.edges and not M.vertices


def test_node_stitching_at_origin():
    M = curve_mesh("y^2 - x^2 - x^3", CURVE_BOX, "1/16")
    origin = Box.point([0, 0])
    st = [k for k, kind in enumerate(M.edge_kind)
          if kind == "stitch" and M.edge_box[k].contains(origin)]
    assert len(st) == 4
    sides = []
    for k in st:
        a, b = M.edges[k]
        far = [M.vertices[v].position for v in (a, b) if M.vertices[v].position != (0, 0)]
        sides.append(far[0][0] > 0)
    assert sorted(sides) == [False, False, True, True]


def test_circle_single_loop_within_eps():
    g = "x^2 + y^2 - 1"
    M = curve_mesh(g, CURVE_BOX, "1/16")
    assert (M.num_components(), M.num_cycles()) == (1, 1)
    assert M.check_boxes()
    for v in M.vertices:
        assert within_eps(g, v.position, Fraction(1, 16))


def test_vertical_line():
    M = curve_mesh("x", "[-1,1]x[-1,1]", "1/4")
    assert (M.num_components(), M.num_cycles()) == (1, 0)
    assert all(v.position[0] == 0 for v in M.vertices)
    assert M.check_boxes()


def test_y_extremal_poly_circle():
    assert str(y_extremal_poly("x^2 + y^2 - 1")) == "x^2"


@pytest.mark.parametrize("name", sorted(CURVES))
def test_extended_meshing_graph_tiles_box(name):
    ca = curve_analysis_for_mesh(CURVES[name], Box.from_pairs([(-2, 2), (-2, 2)]), "1/8")
    D = PlanarDecomposition(ca, "1/8", tile=True)
    E = extend_meshing_graph(ca.g, D.singular_part, D.smooth_part)
    assert E.total_area() == 16
    assert E.check_cells()
    # a triangulated disk
    assert E.euler_characteristic() == 1


@pytest.mark.parametrize("name", sorted(CURVES))
def test_corpus_mesh_certificates(name):
    g = CURVES[name]
    eps = Fraction(1, 16)
    M = curve_mesh(g, CURVE_BOX, eps)
    assert M.check_boxes()
    assert all(B.length <= Q(eps) for B in M.edge_box)
    for leaf in M.leaves:
        if leaf.kind == "nice":
            assert _side_crossings(g, leaf.box) == 2
    rng = random.Random(name)
    for v in rng.sample(M.vertices, min(30, len(M.vertices))):
        assert within_eps(g, v.position, eps)


def test_json_is_deterministic():
    a = curve_mesh("y^2 - x^3", CURVE_BOX, "1/8").to_json()
    b = curve_mesh("y^2 - x^3", CURVE_BOX, "1/8").to_json()
    assert a == b and '"schema_version"' in a


def test_svg_layers():
    M = curve_mesh("y^2 - x^2 - x^3", CURVE_BOX, "1/8")
    full = M.to_svg()
    assert 'id="boxes"' in full and 'id="segregating"' in full
    assert 'id="segregating"' not in M.to_svg(layers=("boxes",))
    assert full.count("<path") == len(M.edges)
