from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from certmesh.curvetop import (branch_numbers, curve_topology, extend_topology_graph,
                               segregate_point_2d)
from certmesh.errors import NotSquareFree, ZeroPolynomial
from certmesh.interval import Box, excludes_zero
from certmesh.ratpoly import Q
from certmesh.rootiso import root_isolate
from corpus import CURVE_BOX, CURVES, box_pairs
from oracles import F, fibre_root_count

B2 = Box.from_pairs([(-2, 2), (-2, 2)])


def _point(system, box):
    return root_isolate(system, Box.from_pairs(box), 1, half_open=False)[0]


def _edges_free(g, P):
    B = P.box
    return (excludes_zero(g, B.replace(1, (B[1].lo, B[1].lo)))
            and excludes_zero(g, B.replace(1, (B[1].hi, B[1].hi))))


@pytest.mark.parametrize("g, system, box", [
    ("y^2 - x^2 - x^3", ["x", "y^2 - x^2 - x^3"], [("-1/4", "1/4"), ("-1/4", "1/4")]),
    ("x^2 + y^2 - 1", ["x", "y - 1"], [("-1/8", "1/8"), ("7/8", "9/8")]),
    ("y", ["x", "y"], [(-1, 1), (-1, 1)]),
])
def test_segregate_point(g, system, box):
    S = segregate_point_2d(g, _point(system, box))
    assert _edges_free(g, S)


@pytest.mark.parametrize("g, system, expect", [
    ("y^2 - x^2 - x^3", ["x", "y^2 - x^2 - x^3"], (2, 2)),
    ("y^2 - x^3", ["x", "y^2 - x^3"], (0, 2)),
    ("16*x^2 + 16*y^2 - 49", ["4*x - 7", "y"], (2, 0)),
])
def test_branch_numbers(g, system, expect):
    P = _point(system, [(-2, 2), (-1, 1)])
    S = segregate_point_2d(g, P)
    assert branch_numbers(g, [S]) == [expect]


def test_circle_topology():
    G = curve_topology("16*x^2 + 16*y^2 - 49", B2, "1/4")
    assert (G.num_components(), G.num_cycles()) == (1, 1)
    assert all(p.left + p.right > 0 for p in G.curve_points())
    crit = [c for c in G.columns if c.critical and c.points]
    assert sorted(F(c.alpha.lo) for c in crit) == [Fraction(-7, 4), Fraction(7, 4)]
    assert all(len(c.points) == 1 for c in crit)


def test_axes_and_circle_has_vertical_chain_and_singular_points():
    G = curve_topology("x*y*(16*x^2 + 16*y^2 - 49)", B2, "1/4")
    assert any(kind == "x-vertical" for _, _, kind in G.edges)
    sing = [(0, 0), (0, Fraction(7, 4)), (0, Fraction(-7, 4)),
            (Fraction(7, 4), 0), (Fraction(-7, 4), 0)]
    for s in sing:
        assert any(p.box.contains(Box.point(s)) for p in G.points), s
    assert G.check_branch_sums() and G.check_planar()


def test_line_in_unit_box():
    G = curve_topology("y - x", Box.from_pairs([(0, 1), (0, 1)]), "1/4")
    crit = [c for c in G.columns if c.critical]
    assert sorted(F(c.alpha.lo) for c in crit) == [0, 1]
    assert (G.num_components(), G.num_cycles()) == (1, 0)


def test_input_validation():
    with pytest.raises(NotSquareFree):
        curve_topology("(x - y)^2", B2, 1)
    with pytest.raises(ZeroPolynomial):
        curve_topology("0", B2, 1)


def test_extend_empty_curve():
    E = extend_topology_graph("x^2 + y^2 + 1", Box.from_pairs([(-1, 1), (-1, 1)]), 1)
    assert E.total_area() == 4 and not E.curve_edges() and E.check_cells()


def test_extend_circle_area():
    E = extend_topology_graph("16*x^2 + 16*y^2 - 49", B2, "1/4")
    assert E.total_area() == 16 and E.check_cells()
    used = {v for c in E.cells for v in c}
    assert used == set(range(len(E.points)))


def test_extend_cross_quadrants():
    E = extend_topology_graph("x*y", Box.from_pairs([(-1, 1), (-1, 1)]), 1)
    [o] = [p.index for p in E.points if p.position == (0, 0)]
    quads = set()
    for c in E.cells:
        if o in c:
            cx = sum(F(E.points[v].position[0]) for v in c) / 3
            cy = sum(F(E.points[v].position[1]) for v in c) / 3
            quads.add((cx > 0, cy > 0))
    assert len(quads) == 4


@pytest.mark.parametrize("name", sorted(CURVES))
def test_corpus_invariants(name):
    g = CURVES[name]
    G = curve_topology(g, CURVE_BOX, "1/8")
    assert G.check_branch_sums()
    assert G.check_segregation()
    assert G.check_planar()
    for p in G.points:
        if not p.regular:
            assert p.box.length <= Q("1/8")
    E = extend_topology_graph(g, CURVE_BOX, "1/8")
    assert E.total_area() == 16 and E.check_cells()


@pytest.mark.parametrize("name", sorted(CURVES))
def test_branch_numbers_match_fibre_oracle(name):
    g = CURVES[name]
    G = curve_topology(g, CURVE_BOX, "1/8")
    for p in G.curve_points():
        (a, b), (c, d) = [(F(I.lo), F(I.hi)) for I in p.box]
        if a == b:
            continue
        lo_x, hi_x = [F(v) for v in box_pairs(CURVE_BOX)[0]]
        if a > lo_x:
            assert p.left == fibre_root_count(g, a, c, d)
        if b < hi_x:
            assert p.right == fibre_root_count(g, b, c, d)


@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(1, 3))
def test_random_conic_invariants(a, b, r):
    g = f"(x - {a}/2)^2 + {b}*x*y + y^2 - {r}"
    if b * b >= 4 and b != 0:
        g = f"(x - {a}/2)^2 + y^2 - {r}"
    G = curve_topology(g, B2, "1/4")
    assert G.check_branch_sums() and G.check_planar()
