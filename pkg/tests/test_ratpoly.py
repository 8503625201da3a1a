import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from certmesh.errors import DegreeTooLow, ParseError, ZeroPolynomial
from certmesh.ratpoly import (Polynomial, Q, discriminant, factorize, flint_factor_hook, gcd,
                              parse_polynomial, resultant, split_content, square_free_part)
from oracles import F, X, Y, random_poly2, sylvester_resultant, sym

P = Polynomial


def polys(nvars=2, max_deg=3):
    exps = st.tuples(*[st.integers(0, max_deg)] * nvars + [st.just(0)] * (3 - nvars))
    coef = st.fractions(min_value=-9, max_value=9, max_denominator=4)
    return st.dictionaries(exps, coef, max_size=6).map(P)


# --- spec examples ---------------------------------------------------------

def test_resultant_sphere_derivative():
    f = P("z^2 + x^2 + y^2 - 1")
    assert resultant(f, P("2*z"), "z") == P("4*x^2 + 4*y^2 - 4")


def test_resultant_constant_argument():
    assert resultant(P("x^3 + x + 7"), P(5), "x") == P(125)


def test_resultant_two_lines():
    assert resultant(P("y - x"), P("y + x"), "y") == P("2*x")


def test_discriminant_examples():
    # plain Res(p, dp/dz): the classical discriminant up to sign
    assert discriminant(P("z^2 - x"), "z") == P("-4*x")
    assert discriminant(P("z^2 + 1"), "z") == P(4)
    assert discriminant(P("(z - 1)^2"), "z").is_zero()
    Z = sympy.Symbol("z")
    for text in ("z^2 + 1", "3*z^3 - z + 2"):
        e = sympy.sympify(text.replace("^", "**"))
        assert F(discriminant(P(text), "z").evaluate((0, 0, 0))) == \
            sylvester_resultant(e, sympy.diff(e, Z), Z)


def test_discriminant_degree_too_low():
    with pytest.raises(DegreeTooLow):
        discriminant(P("z + x"), "z")


def test_square_free_examples():
    assert square_free_part(P("x^2")) == P("x")
    got = square_free_part(P("(x^2 + y^2 - 1)^2*(x - y)"))
    assert got == P("(x^2 + y^2 - 1)*(x - y)") or got == -P("(x^2 + y^2 - 1)*(x - y)")
    assert square_free_part(P("x^3 - x")) == P("x^3 - x")


def test_square_free_zero():
    with pytest.raises(ZeroPolynomial):
        square_free_part(P(0))


def test_split_content_examples():
    c, q = split_content(P("x*y*(16*x^2 + 16*y^2 - 49)"), ["x"])
    assert (c, q) == (P("x"), P("y*(16*x^2 + 16*y^2 - 49)"))
    c, q = split_content(P("x^2 + y^2"), ["x"])
    assert (c, q) == (P(1), P("x^2 + y^2"))
    c, q = split_content(P("(x^2 - 1)*(y - x)"), ["x"])
    assert c * q == P("(x^2 - 1)*(y - x)")
    assert c.variables() == ("x",) and q.degree("y") == 1 and q.degree("x") == 1


def test_split_content_zero():
    with pytest.raises(ZeroPolynomial):
        split_content(P(0), ["x"])


def test_factorize_with_hook_three_factors():
    fl = factorize(P("(z - y)*(z - x)*(x^2 + y^2 + z^2 - 1)"), flint_factor_hook)
    assert len(fl.factors) == 3 and not fl.partial


def test_factorize_irreducible_and_product():
    fl = factorize(P("x^2 + 1"))
    assert [(str(f), m) for f, m in fl.factors] == [("x^2 + 1", 1)]
    fl = factorize(P("x*y"))
    assert sorted(str(f) for f, _ in fl.factors) == ["x", "y"]


def test_factorize_default_is_partial():
    fl = factorize(P("(x + y)*(x - y)"))
    assert fl.partial
    assert fl.product() == P("(x + y)*(x - y)")


def test_parser_grammar_example():
    p = parse_polynomial("x^2*y^2 + y^2*z^2 + z^2*x^2 - 7/2*x*y*z")
    assert F(p.evaluate((Q(1), Q(2), Q(3)))) == Fraction(4 + 36 + 9) - Fraction(7, 2) * 6


def test_parser_error_has_location():
    with pytest.raises(ParseError) as e:
        parse_polynomial("x +* y")
    assert "column" in str(e.value)


@pytest.mark.parametrize("bad", ["", "x^-1", "x^(1/2)", "w + 1", "(x + 1", "x + 1)", "1/0"])
def test_parser_rejects(bad):
    with pytest.raises(ParseError):
        parse_polynomial(bad)


# --- oracle checks ---------------------------------------------------------

def test_resultant_matches_sylvester_oracle():
    rng = random.Random(7)
    for _ in range(50):
        p, q = random_poly2(rng, 4, "y"), random_poly2(rng, 4, "y")
        a = Fraction(rng.randint(-20, 20), rng.randint(1, 9))
        res = resultant(P(p), P(q), "y")
        expect = sylvester_resultant(sym(p).subs(X, sympy.Rational(a)),
                                     sym(q).subs(X, sympy.Rational(a)), Y)
        # resultant commutes with specialization when leading coefficients survive
        lp = sympy.Poly(sym(p), Y).LC().subs(X, sympy.Rational(a))
        lq = sympy.Poly(sym(q), Y).LC().subs(X, sympy.Rational(a))
        if lp != 0 and lq != 0:
            assert F(res.evaluate((Q(a), Q(0), Q(0)))) == expect


# --- properties ------------------------------------------------------------

@given(polys(), polys())
def test_ring_axioms(p, q):
    assert p * q == q * p
    assert (p + q) - q == p
    assert p * (q + P(1)) == p * q + p


@given(polys(3, 2))
def test_parser_round_trip(p):
    assert parse_polynomial(str(p)) == p
    assert parse_polynomial(str(parse_polynomial(str(p)))) == parse_polynomial(str(p))


@given(polys(2, 3).filter(lambda p: not p.is_zero()))
def test_split_content_identity(p):
    c, q = split_content(p, ["x"])
    assert c * q == p
    assert c.degree("y") <= 0 and c.degree("z") <= 0
    c2, _ = split_content(q, ["x"])
    assert c2.is_constant()


@given(polys(2, 2).filter(lambda p: not p.is_constant()))
def test_square_free_same_zero_set_and_no_square(p):
    s = square_free_part(p)
    for v in s.variables():
        assert gcd(s, s.diff(v)).degree(v) == 0
    # same zero set: s divides p and p divides a power of s
    p.exact_div(s)  # raises unless exact
    k = max(p.degree(v) for v in p.variables())
    power = P(1)
    for _ in range(k):
        power = power * s
    power.exact_div(p)


@given(polys(2, 2).filter(lambda p: not p.is_constant()), polys(2, 2).filter(lambda p: not p.is_constant()))
def test_factorize_product_up_to_unit(p, q):
    f = square_free_part(p * q)
    fl = factorize(f)
    prod = fl.product()
    assert prod == f


@given(polys(2, 3), polys(2, 3))
def test_resultant_antisymmetry_up_to_sign(p, q):
    if p.degree("y") < 1 or q.degree("y") < 1:
        return
    a, b = resultant(p, q, "y"), resultant(q, p, "y")
    assert a == b or a == -b
