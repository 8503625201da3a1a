import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from certmesh.errors import ZeroLevelPolynomial
from certmesh.interval import Box
from certmesh.ratpoly import Q
from certmesh.rootiso import isolate_real_roots, real_roots, refine, root_isolate
from oracles import F, peval, sturm_count


def test_sqrt2():
    pts = root_isolate(["x^2 - 2"], Box.from_pairs([(0, 2)]), "1/16")
    assert len(pts) == 1
    B = pts[0].box
    assert B.length < Q("1/16")
    assert F(B[0].lo) ** 2 <= 2 <= F(B[0].hi) ** 2


def test_no_real_roots():
    assert root_isolate(["x^2 + 1"], Box.from_pairs([(-10, 10)]), 1) == []


def test_triangular_2d():
    pts = root_isolate(["x^2 - 2", "y^2 - x"], Box.from_pairs([(0, 2), (0, 2)]), "1/32")
    assert len(pts) == 1
    (xl, xh), (yl, yh) = [(F(d.lo), F(d.hi)) for d in pts[0].box]
    assert xl <= math.sqrt(2) <= xh and yl <= 2 ** 0.25 <= yh
    assert pts[0].box.length < Q("1/32")


def test_triangular_3d_count():
    pts = root_isolate(["x^2 - 1/4", "y^2 - x - 1", "z^2 - y^2 - x"],
                       Box.from_pairs([(-1, 1), (-2, 2), (-3, 3)]), "1/64")
    # x = +-1/2, two ys each; z^2 = 2x + 1 gives z = 0 over x = -1/2 and two zs over 1/2
    assert len(pts) == 6


def test_refine_nested_and_idempotent():
    P = root_isolate(["x^2 - 2"], Box.from_pairs([(1, 2)]), 2)[0]
    old = P.box
    R = refine(P, "1/8")
    assert R.box.length <= Q("1/8") and old.contains(R.box)
    again = refine(R, 1)
    assert again.box == R.box


def test_rational_root_is_exact():
    P = root_isolate(["2*x - 1"], Box.from_pairs([(0, 1)]), 1)[0]
    assert P.box[0].lo <= Q("1/2") <= P.box[0].hi
    assert refine(P, "1/1000").box[0].width < Q("1/1000") or P.box[0].is_point()


def test_half_open_boundary():
    B = Box.from_pairs([(0, 1)])
    assert len(root_isolate(["x^2 - x"], B, "1/4")) == 1
    assert len(root_isolate(["x^2 - x"], B, "1/4", half_open=False)) == 2


def test_zero_level_polynomial():
    with pytest.raises(ZeroLevelPolynomial):
        root_isolate(["x^2 - 2", "x - 1"], Box.from_pairs([(0, 2), (0, 2)]), 1)


def test_refinement_steps_logarithmic():
    r = real_roots([-2, 0, 1], 0, 2)[0]
    steps = 0
    while r.width >= Q(1) / 2 ** 20:
        r.refine_once()
        steps += 1
    assert steps <= 20 + 4


@given(st.lists(st.integers(-9, 9), min_size=2, max_size=9).filter(lambda c: c[-1] != 0),
       st.fractions(-4, 0, max_denominator=7), st.fractions(0, 4, max_denominator=7))
def test_count_matches_sturm(coeffs, lo, hi):
    if lo == hi or peval(coeffs, lo) == 0 or peval(coeffs, hi) == 0:
        return
    if all(c == 0 for c in coeffs[1:]):
        return
    ivs = isolate_real_roots(coeffs, Q(lo), Q(hi))
    assert len(ivs) == sturm_count(coeffs, lo, hi)
    ivs = sorted((F(a), F(b)) for a, b in ivs)
    for (a, b), (c, d) in zip(ivs, ivs[1:]):
        assert b < c or (b == c and peval(coeffs, b) != 0 and a < b)


@given(st.lists(st.integers(-9, 9), min_size=3, max_size=7).filter(lambda c: c[-1] != 0))
def test_root_boxes_disjoint_and_small(coeffs):
    eps = Fraction(1, 64)
    poly = " + ".join(f"({c})*x^{k}" for k, c in enumerate(coeffs))
    pts = root_isolate([poly], Box.from_pairs([(-10, 10)]), eps)
    boxes = sorted((F(p.box[0].lo), F(p.box[0].hi)) for p in pts)
    for lo, hi in boxes:
        assert hi - lo < eps
    for (a, b), (c, d) in zip(boxes, boxes[1:]):
        assert b < c
