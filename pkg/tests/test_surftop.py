import pytest

from certmesh.errors import DegenerateInZ, NotSquareFree, VerticalLineContained
from certmesh.interval import Box, excludes_zero
from certmesh.ratpoly import Polynomial, Q
from certmesh.rootiso import root_isolate
from certmesh.surftop import (count_sccs, count_tsp, lift_and_segregate, projection_curve,
                              surface_topology)
from corpus import SURFACES

CUBE = "[-2,2]x[-2,2]x[-2,2]"


def _planar(system, pairs=((-1, 1), (-1, 1))):
    return root_isolate(system, Box.from_pairs(pairs), 1, half_open=False)[0]


def _certified(f, P):
    B = P.box
    return (excludes_zero(f, B.replace(2, (B[2].lo, B[2].lo)))
            and excludes_zero(f, B.replace(2, (B[2].hi, B[2].hi))))


def test_projection_curve_sphere():
    G = projection_curve("x^2+y^2+z^2-1", CUBE)
    expect = Polynomial("(x^2+y^2-1)*(x^2+y^2+3)")
    assert G == expect or G == -expect


def test_projection_curve_plane():
    G = projection_curve("z - x", CUBE)
    assert G == Polynomial("(x - 2)*(x + 2)") or G == -Polynomial("(x - 2)*(x + 2)")


def test_steiner_vertical_line():
    f, B = SURFACES["S4"]
    with pytest.raises(VerticalLineContained):
        projection_curve(f, B)
    with pytest.raises(VerticalLineContained):
        surface_topology(f, B)


def test_input_validation():
    with pytest.raises(DegenerateInZ):
        projection_curve("x^2 + y^2 - 1", CUBE)
    with pytest.raises(NotSquareFree):
        surface_topology("z^2", CUBE)


def test_lift_sphere_origin():
    f = "x^2+y^2+z^2-1"
    lifted, P = lift_and_segregate(f, CUBE, _planar(["x", "y"]), "1/4")
    assert len(lifted) == 2
    zs = sorted((L.box[2].lo, L.box[2].hi) for L in lifted)
    assert zs[0][1] < zs[1][0]
    assert zs[0][0] <= -1 <= zs[0][1] and zs[1][0] <= 1 <= zs[1][1]
    assert all(_certified(f, L) for L in lifted)


def test_lift_plane_point():
    lifted, _ = lift_and_segregate("z - x", CUBE, _planar(["2*x - 1", "y"]), "1/4")
    assert len(lifted) == 1
    assert lifted[0].box[2].contains(Q("1/2"))


def test_plane_counts_are_one():
    T = surface_topology("z - x", "[-1,1]x[-1,1]x[-2,2]")
    assert all(n == 1 for n in T.sccs.values())
    assert all(n == 1 for n in T.tsp.values())
    for (p, e) in T.sccs:
        assert count_sccs(T, p, e) == 1
    for (E, c) in T.tsp:
        assert count_tsp(T, E, c) == 1
    assert T.check_sccs() and T.check_tsp()


def test_isolated_singularity_has_no_segments():
    T = surface_topology("x^2 + y^2 + z^2", "[-1,1]x[-1,1]x[-1,1]")
    assert len(T.points) == 1 and not T.edges and not T.faces
    assert all(count_sccs(T, 0, e) == 0 for e in range(len(T.graph_edges())))


def test_double_cone():
    T = surface_topology("x^2 + y^2 - z^2", "[-1,1]x[-1,1]x[-1,1]")
    assert T.check_sccs() and T.check_tsp() and T.check_segregation()
    assert T.num_components() == 1
    # the apex is a point where the two nappes meet
    apex = [i for i, p in enumerate(T.points) if p.box.contains(Box.point([0, 0, 0]))]
    assert len(apex) == 1


def test_sphere_closed():
    T = surface_topology(*SURFACES["sphere"])
    assert T.euler_characteristic() == 2 and T.num_components() == 1 and T.is_closed()


def test_torus():
    T = surface_topology(*SURFACES["torus"])
    assert T.euler_characteristic() == 0 and T.num_components() == 1 and T.is_closed()


@pytest.mark.parametrize("name", ["S1", "S3", "S5"])
def test_corpus_identities(name):
    T = surface_topology(*SURFACES[name])
    assert T.check_sccs() and T.check_tsp() and T.check_segregation()
    counts = T.edge_face_counts()
    assert all(n >= 1 for n in counts.values())


def test_closed_surface_even_euler():
    f, B = SURFACES["S3"]
    T = surface_topology(f, B)
    faces = [Box.from_pairs([(lo, hi) if j != i else (v, v) for j, (lo, hi) in
                             enumerate([(-2, 2)] * 3)]) for i in range(3) for v in (-2, 2)]
    if all(excludes_zero(f, F) for F in faces):
        assert T.is_closed()


def test_obj_and_json_output():
    T = surface_topology("x^2+y^2+z^2-1", CUBE)
    obj = T.to_obj()
    assert sum(1 for line in obj.splitlines() if line.startswith("v ")) == len(T.points)
    assert sum(1 for line in obj.splitlines() if line.startswith("f ")) == len(T.faces)
    assert T.to_json() == surface_topology("x^2+y^2+z^2-1", CUBE).to_json()
