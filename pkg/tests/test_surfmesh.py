import json
import random
from fractions import Fraction

import pytest

from certmesh.curvemesh import NiceBox
from certmesh.interval import Box, excludes_zero
from certmesh.ratpoly import Polynomial, Q, factorize, flint_factor_hook
from certmesh.surfmesh import (IrreducibleChain, MeshingPolyhedron, chain_extremal_poly,
                               chain_planes, decompose_spatial_curve, extremal_poly_surface,
                               merge_meshes, mpv3, seg_box_sccs, surface_mesh)
from oracles import within_eps

SPHERE = "x^2 + y^2 + z^2 - 1"


def _g1(f):
    return extremal_poly_surface(factorize(f, flint_factor_hook))


@pytest.mark.parametrize("f, expect", [
    (SPHERE, "16*x^2*y^2"),
    ("z - x", "1"),
    (f"(z - y)*(z - x)*({SPHERE})", "16*x^2*y^2"),
])
def test_extremal_poly_surface(f, expect):
    G = _g1(f)
    assert G == Polynomial(expect) or G == -Polynomial(expect)


def test_decompose_two_chains():
    chains = decompose_spatial_curve("y", "z*(x^2 + z^2 - 1)")
    assert [(str(c.g), str(c.f)) for c in chains] == [("y", "z"), ("y", "x^2 + z^2 - 1")]


def test_decompose_single_chain():
    chains = decompose_spatial_curve("y - x", "z - x")
    assert len(chains) == 1


def test_decompose_splits_over_curve():
    chains = decompose_spatial_curve("y^2 - x", "z^2 - x")
    assert sorted(str(c.f) for c in chains) == ["x + y*z", "x - y*z"]
    assert not any(c.partial for c in chains)


def test_decompose_without_hook_is_partial():
    chains = decompose_spatial_curve("y^2 - x", "z^2 - x", hook=None)
    assert chains and all(c.partial for c in chains)


def test_chain_extremal_circle_in_plane():
    T, _, planar = chain_extremal_poly(IrreducibleChain(Polynomial("y"),
                                                        Polynomial("x^2 + z^2 - 1")))
    assert str(T) == "4*x^2" and not planar


def test_chain_extremal_line():
    T, _, planar = chain_extremal_poly(IrreducibleChain(Polynomial("y - x"), Polynomial("z - x")))
    assert T == Polynomial(-1) and not planar


def test_planar_chain():
    ch = IrreducibleChain(Polynomial("y"), Polynomial("z"))
    T, _, planar = chain_extremal_poly(ch)
    assert T.is_zero() and planar
    [r] = chain_planes(ch)
    assert r.lo == r.hi == 0


def test_seg_box_sccs_plane():
    B = NiceBox(Box.from_pairs([(0, "1/8"), ("-1/16", "1/16")]), "nice")
    _, boxes = seg_box_sccs("z - x", "y - x", "[-1,1]x[-1,1]x[-1,1]", B, "1/4")
    assert len(boxes) == 1
    Bz = boxes[0]
    assert Bz.length <= Q("1/4")
    for w in (Bz[2].lo, Bz[2].hi):
        assert excludes_zero("z - x", Bz.replace(2, (w, w)))


def test_mpv3_paraboloid():
    f = "z - x^2 - y^2"
    M = mpv3(f, [Box.from_pairs([("1/4", 1), ("1/4", 1)])], "1/8")
    assert M.check_boxes() and M.num_components() == 1
    assert M.euler_characteristic() == 1
    for p in M.points:
        assert within_eps(f, p, Fraction(1, 8))


def test_sphere_coarse():
    M = surface_mesh(SPHERE, "[-2,2]x[-2,2]x[-2,2]", "1/2")
    assert (M.euler_characteristic(), M.num_components()) == (2, 1)
    assert M.is_watertight() and M.is_closed() and M.check_boxes()
    rng = random.Random(0)
    for p in rng.sample(M.points, 30):
        assert within_eps(SPHERE, p, Fraction(1, 2))


def test_double_cone():
    M = surface_mesh("x^2 + y^2 - z^2", "[-1,1]x[-1,1]x[-1,1]", "1/4")
    assert M.euler_characteristic() == 1 and M.num_components() == 1
    assert M.is_watertight() and M.check_boxes()


def test_plane_through_box():
    M = surface_mesh("z - x", "[-1,1]x[-1,1]x[-2,2]", "1/2")
    assert M.euler_characteristic() == 1 and M.is_watertight() and M.check_boxes()
    assert all(p[2] == p[0] for p in M.points)


def test_merge_with_empty():
    B = Box.from_pairs([(0, 1)] * 3)
    M = mpv3("z - x", [Box.from_pairs([(0, "1/2"), (0, "1/2")])], "1/4")
    assert merge_meshes(MeshingPolyhedron(B, Q(1)), M) is M
    assert merge_meshes(MeshingPolyhedron(B, Q(1)), MeshingPolyhedron(B, Q(1))).points == []


def test_audit_and_json():
    M = surface_mesh(SPHERE, "[-2,2]x[-2,2]x[-2,2]", "1/2")
    doc = json.loads(M.to_json())
    assert doc["euler_characteristic"] == 2 and doc["watertight"] is True
    assert doc["audit"]["G1"] in ("16*x^2*y^2", "-16*x^2*y^2")
    assert len(doc["faces"]) == len(M.faces)
    assert {"singular", "smooth"} <= set(M.parts)
    assert M.to_json() == surface_mesh(SPHERE, "[-2,2]x[-2,2]x[-2,2]", "1/2").to_json()


def test_obj_output():
    M = surface_mesh(SPHERE, "[-2,2]x[-2,2]x[-2,2]", "1/2")
    lines = M.to_obj().splitlines()
    assert sum(l.startswith("v ") for l in lines) == len(M.points)
    assert sum(l.startswith("f ") for l in lines) == len(M.faces)
