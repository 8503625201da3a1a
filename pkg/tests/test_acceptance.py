"""Acceptance criteria, one test per criterion.

Each test asserts the criterion at its stated tolerance; reference values
come from the independent oracles in ``oracles.py``.
"""

import random
import time
from fractions import Fraction

import pytest
import sympy

from certmesh.cli import main
from certmesh.curvemesh import curve_mesh
from certmesh.curvetop import curve_topology
from certmesh.interval import Box, box_eval, excludes_zero
from certmesh.ratpoly import Polynomial, Q, resultant
from certmesh.rootiso import isolate_real_roots
from certmesh.surfmesh import IrreducibleChain, chain_extremal_poly, chain_planes, surface_mesh
from certmesh.surftop import surface_topology
from corpus import CURVE_BOX, CURVES, SURFACES, box_pairs
from oracles import (F, X, Y, fibre_root_count, marching_cube_components, peval,
                     pixel_topology, random_poly2, sturm_count, sylvester_resultant, sym,
                     within_eps)


@pytest.mark.parametrize("name", ["S1", "S2", "S3", "S5"])
def test_a_surface_topology_corpus(name):
    f, B = SURFACES[name]
    t = time.perf_counter()
    T = surface_topology(f, B)
    elapsed = time.perf_counter() - t
    assert elapsed < 120
    _raw, linked = marching_cube_components(f, box_pairs(B), 128)
    assert T.num_components() == linked
    assert T.check_sccs() and T.check_tsp()


def test_b_steiner_surface_rejected(tmp_path):
    f, B = SURFACES["S4"]
    rc = main(["surface-topology", "-f", f, "--box", B, "-o", str(tmp_path / "s4.obj"),
               "--quiet"])
    assert rc == 11


def test_c_sphere_and_torus_invariants():
    T = surface_topology(*SURFACES["sphere"])
    assert (T.euler_characteristic(), T.num_components(), T.is_closed()) == (2, 1, True)
    T = surface_topology(*SURFACES["torus"])
    assert (T.euler_characteristic(), T.num_components()) == (0, 1)


@pytest.mark.parametrize("name", sorted(CURVES))
def test_d_curve_corpus(name):
    g = CURVES[name]
    t = time.perf_counter()
    G = curve_topology(g, CURVE_BOX, "1/8")
    elapsed = time.perf_counter() - t
    assert elapsed < 10
    (xlo, xhi), _ = [(F(a), F(b)) for a, b in box_pairs(CURVE_BOX)]
    for p in G.curve_points():
        (a, b), (c, d) = [(F(I.lo), F(I.hi)) for I in p.box]
        if a == b:
            continue
        if a > xlo:
            assert p.left == fibre_root_count(g, a, c, d)
        if b < xhi:
            assert p.right == fibre_root_count(g, b, c, d)
    assert (G.num_components(), G.num_cycles()) == pixel_topology(g, box_pairs(CURVE_BOX), 2048)


@pytest.mark.parametrize("name", sorted(CURVES))
def test_e_curve_mesh(name):
    g, eps = CURVES[name], Fraction(1, 16)
    M = curve_mesh(g, CURVE_BOX, eps)
    assert M.check_boxes() and all(B.length <= Q(eps) for B in M.edge_box)
    rng = random.Random(name)
    for v in rng.sample(M.vertices, min(100, len(M.vertices))):
        assert within_eps(g, v.position, eps)
    # every vertex off the box boundary ends at least two edges
    deg = [0] * len(M.vertices)
    for i, j in M.edges:
        deg[i] += 1
        deg[j] += 1
    (xlo, xhi), (ylo, yhi) = [(F(a), F(b)) for a, b in box_pairs(CURVE_BOX)]
    for v, d in zip(M.vertices, deg):
        x, y = F(v.position[0]), F(v.position[1])
        if xlo < x < xhi and ylo < y < yhi:
            assert d >= 2


@pytest.mark.parametrize("name", ["sphere", "torus"])
def test_e_surface_mesh(name):
    f, B = SURFACES[name]
    eps = Fraction(1, 8)
    M = surface_mesh(f, B, eps)
    assert M.check_boxes() and all(b.length <= Q(eps) for b in M.face_box)
    rng = random.Random(name)
    for p in rng.sample(M.points, 100):
        assert within_eps(f, p, eps)
    assert M.is_watertight()


def test_f_chain_extremal_polynomials():
    T, _, planar = chain_extremal_poly(IrreducibleChain(Polynomial("y"),
                                                        Polynomial("x^2 + z^2 - 1")))
    assert T == Polynomial("4*x^2") and not planar
    ch = IrreducibleChain(Polynomial("y"), Polynomial("z"))
    T, _, planar = chain_extremal_poly(ch)
    assert planar and [(r.lo, r.hi) for r in chain_planes(ch)] == [(0, 0)]


def test_g_kernel_suites():
    t = time.perf_counter()
    rng = random.Random(2024)

    # resultants against the Sylvester determinant
    checked = 0
    while checked < 50:
        p, q = random_poly2(rng, 4, "y"), random_poly2(rng, 4, "y")
        a = Fraction(rng.randint(-20, 20), rng.randint(1, 9))
        ps, qs = [sym(s).subs(X, sympy.Rational(a.numerator, a.denominator)) for s in (p, q)]
        if sympy.Poly(sym(p), Y).LC().subs(X, a) == 0 or sympy.Poly(sym(q), Y).LC().subs(X, a) == 0:
            continue
        res = resultant(Polynomial(p), Polynomial(q), "y")
        assert F(res.evaluate((Q(a), Q(0), Q(0)))) == sylvester_resultant(ps, qs, Y)
        checked += 1

    # box evaluation contains every point value
    f = Polynomial("x^3*y - 2*x*y*z^2 + z^3 - 3/2*x + y^2*z - 1")
    for _ in range(10 ** 4):
        pairs = []
        pt = []
        for _d in range(3):
            lo = Fraction(rng.randint(-64, 64), 16)
            hi = lo + Fraction(rng.randint(0, 32), 16)
            pairs.append((lo, hi))
            pt.append(lo + (hi - lo) * Fraction(rng.randint(0, 8), 8))
        B = Box.from_pairs(pairs)
        v = f.evaluate(tuple(Q(c) for c in pt))
        I = box_eval(f, B)
        assert I.lo <= v <= I.hi
        if excludes_zero(f, B):
            assert v != 0

    # root counts against Sturm sequences
    done = 0
    while done < 200:
        coeffs = [rng.randint(-9, 9) for _ in range(rng.randint(2, 8))]
        if coeffs[-1] == 0 or all(c == 0 for c in coeffs[1:]):
            continue
        lo, hi = Fraction(rng.randint(-40, 0), 8), Fraction(rng.randint(1, 40), 8)
        if peval(coeffs, lo) == 0 or peval(coeffs, hi) == 0:
            continue
        assert len(isolate_real_roots(coeffs, Q(lo), Q(hi))) == sturm_count(coeffs, lo, hi)
        done += 1

    assert time.perf_counter() - t < 60
