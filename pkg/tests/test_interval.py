from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from certmesh.errors import DimensionMismatch, ParseError
from certmesh.interval import Box, Interval, as_box, box_eval, excludes_zero, parse_box
from certmesh.ratpoly import Polynomial, Q
from oracles import F

fracs = st.fractions(min_value=-4, max_value=4, max_denominator=16)


def test_box_eval_examples():
    assert box_eval("x", Box.from_pairs([(1, 2)])) == Interval(1, 2)
    I = box_eval("x^2 - 2", Box.from_pairs([(1, 2)]))
    assert I.lo <= -1 and I.hi >= 2
    I = box_eval("x*y", Box.from_pairs([(0, 1), (0, 1)]))
    assert I.lo <= 0 and I.hi >= 1


def test_excludes_zero_examples():
    assert excludes_zero("x^2 + 1", Box.from_pairs([(-5, 5)]))
    assert not excludes_zero("x", Box.from_pairs([(-1, 1)]))
    assert excludes_zero("x^2 - 2", Box.from_pairs([("3/2", 2)]))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        box_eval("x + z", Box.from_pairs([(0, 1), (0, 1)]))


def test_point_box_is_exact():
    I = box_eval("x^2 - 2*x*y", Box.point([3, "1/2"]))
    assert I.lo == I.hi == 6


def test_parse_box():
    B = parse_box("[-3/2,3/2]x[-5/4,5/4]")
    assert F(B[0].lo) == Fraction(-3, 2) and F(B[1].hi) == Fraction(5, 4)
    assert as_box("[0,1]") == Box.from_pairs([(0, 1)])
    for bad in ("[1,0]", "[0,1]x", "(0,1)", "[a,1]", "[0,1]x[0,1]x[0,1]x[0,1]"):
        with pytest.raises((ParseError, DimensionMismatch)):
            parse_box(bad)


def test_box_length_is_widest_side():
    assert Box.from_pairs([(0, 1), (0, 3)]).length == 3


def test_convergence_near_non_root():
    # nested boxes around (1/3, 1/5), where x^2 + y^2 - 1/2 is nonzero
    f = Polynomial("x^2 + y^2 - 1/2")
    c = (Q("1/3"), Q("1/5"))
    r = Q(1)
    for k in range(60):
        B = Box.from_pairs([(c[0] - r, c[0] + r), (c[1] - r, c[1] + r)])
        if excludes_zero(f, B):
            break
        r /= 2
    else:
        pytest.fail("no certificate after 60 halvings")
    assert k < 10


@given(st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2)),
                       st.integers(-9, 9), max_size=6),
       st.lists(st.tuples(fracs, fracs), min_size=3, max_size=3),
       st.lists(st.fractions(0, 1, max_denominator=8), min_size=3, max_size=3))
def test_box_eval_soundness(terms, pairs, ts):
    f = Polynomial(terms)
    dims = [(min(a, b), max(a, b)) for a, b in pairs]
    B = Box.from_pairs(dims)
    p = [lo + t * (hi - lo) for (lo, hi), t in zip(dims, ts)]
    v = f.evaluate(tuple(Q(c) for c in p))
    I = box_eval(f, B)
    assert I.lo <= v <= I.hi
    if excludes_zero(f, B):
        assert v != 0


@given(st.lists(st.tuples(fracs, fracs), min_size=2, max_size=2))
def test_split_covers(pairs):
    B = Box.from_pairs([(min(a, b), max(a, b)) for a, b in pairs])
    m = B[0].mid
    lo, hi = B[0].split(m)
    assert lo.lo == B[0].lo and hi.hi == B[0].hi and lo.hi == hi.lo == m
