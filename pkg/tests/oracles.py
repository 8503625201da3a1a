"""Independent reference computations for the test suite.

Nothing here calls into :mod:`certmesh`; inputs are polynomial strings,
coefficient lists of :class:`fractions.Fraction` and pairs of endpoints.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy
from scipy import ndimage

X, Y, Z = sympy.symbols("x y z")


def sym(text: str) -> sympy.Expr:
    """A polynomial string in the package grammar as a sympy expression."""
    return sympy.sympify(text.replace("^", "**"), locals={"x": X, "y": Y, "z": Z})


def F(value) -> Fraction:
    """Any exact rational (FLINT, int, Fraction, string) as a Fraction."""
    return Fraction(str(value))


# --- univariate polynomials as ascending Fraction lists --------------------

def _trim(p: list) -> list:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def peval(p: list, t) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * t + c
    return acc


def pderiv(p: list) -> list:
    return _trim([k * p[k] for k in range(1, len(p))])


def prem(a: list, b: list) -> list:
    """Remainder of ``a`` by ``b`` over Q."""
    a, b = _trim(a), _trim(b)
    while len(a) >= len(b) and a:
        q = a[-1] / b[-1]
        s = len(a) - len(b)
        for k, c in enumerate(b):
            a[s + k] -= q * c
        a = _trim(a)
    return a


def sturm_count(p: list, lo: Fraction, hi: Fraction) -> int:
    """Distinct real roots of ``p`` in ``(lo, hi]`` by a Sturm sequence."""
    p = [Fraction(c) for c in _trim(p)]
    seq = [p, pderiv(p)]
    while seq[-1]:
        r = prem(seq[-2], seq[-1])
        seq.append([-c for c in r])
    seq = [s for s in seq if s]

    def changes(t):
        signs = [v for v in (peval(s, t) for s in seq) if v != 0]
        return sum(1 for u, v in zip(signs, signs[1:]) if (u > 0) != (v > 0))

    return changes(lo) - changes(hi)


# --- Sylvester resultant ---------------------------------------------------

def sylvester_matrix(p: list, q: list) -> list:
    """Sylvester matrix of ``p`` and ``q`` given by descending coefficients."""
    m, n = len(p) - 1, len(q) - 1
    size = m + n
    rows = []
    for i in range(n):
        rows.append([Fraction(0)] * i + list(p) + [Fraction(0)] * (size - m - 1 - i))
    for i in range(m):
        rows.append([Fraction(0)] * i + list(q) + [Fraction(0)] * (size - n - 1 - i))
    return rows


def bareiss_det(M: list) -> Fraction:
    """Determinant by fraction-exact Bareiss elimination."""
    A = [[Fraction(v) for v in row] for row in M]
    n = len(A)
    if n == 0:
        return Fraction(1)
    sign, prev = 1, Fraction(1)
    for k in range(n - 1):
        if A[k][k] == 0:
            for r in range(k + 1, n):
                if A[r][k] != 0:
                    A[k], A[r] = A[r], A[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) / prev
        prev = A[k][k]
    return sign * A[-1][-1]


def sylvester_resultant(p: sympy.Expr, q: sympy.Expr, var: sympy.Symbol) -> Fraction:
    """Resultant of two univariate rational polynomials via the Sylvester
    determinant, with ``Res(p, c) = c^deg(p)`` for a constant ``c``."""
    P, Qp = sympy.Poly(p, var), sympy.Poly(q, var)
    dp, dq = P.degree(), Qp.degree()
    if dq <= 0:
        return Fraction(str(Qp.as_expr())) ** max(dp, 0)
    if dp <= 0:
        return Fraction(str(P.as_expr())) ** dq
    pc = [Fraction(str(c)) for c in P.all_coeffs()]
    qc = [Fraction(str(c)) for c in Qp.all_coeffs()]
    return bareiss_det(sylvester_matrix(pc, qc))


def random_poly2(rng: random.Random, deg: int, var: str) -> str:
    """Random dense polynomial in ``x`` and ``var`` with total degree <= deg
    and positive degree in ``var``."""
    terms = []
    for i in range(deg + 1):
        for j in range(deg + 1 - i):
            c = rng.randint(-5, 5)
            if c:
                terms.append(f"({c})*x^{i}*{var}^{j}")
    terms.append(f"{rng.randint(1, 4)}*{var}^{rng.randint(1, deg)}")
    return " + ".join(terms)


# --- pixel oracle for plane curves -----------------------------------------

def pixel_topology(text: str, box, n: int = 2048) -> tuple:
    """``(components, cycles)`` of the curve from a dense grid.

    A pixel is on the curve when the sign of ``g`` changes among its four
    corners; curve pixels are joined with 8-connectivity.  Cycles are the
    bounded faces: 4-connected components of the complement that do not
    reach the border of the box.
    """
    g = sympy.lambdify((X, Y), sym(text), "numpy")
    (x0, x1), (y0, y1) = [(float(Fraction(a)), float(Fraction(b))) for a, b in box]
    # shifted so grid nodes avoid exact rational features of the corpus
    xs = np.linspace(x0, x1, n + 1) + (x1 - x0) * 1e-7
    ys = np.linspace(y0, y1, n + 1) + (y1 - y0) * 1.3e-7
    V = np.sign(g(*np.meshgrid(xs, ys, indexing="ij")) * np.ones((n + 1, n + 1)))
    lo = np.minimum.reduce([V[:-1, :-1], V[1:, :-1], V[:-1, 1:], V[1:, 1:]])
    hi = np.maximum.reduce([V[:-1, :-1], V[1:, :-1], V[:-1, 1:], V[1:, 1:]])
    curve = (lo <= 0) & (hi >= 0)
    _, comps = ndimage.label(curve, structure=np.ones((3, 3)))
    holes, k = ndimage.label(~curve)
    border = set(np.unique(np.concatenate(
        [holes[0, :], holes[-1, :], holes[:, 0], holes[:, -1]]))) - {0}
    return comps, k - len(border)


# --- marching-cube oracle for surfaces ---------------------------------------

def marching_cube_components(text: str, box, n: int = 128) -> tuple:
    """``(raw, linked)`` connected-component counts of a marching-cubes mesh.

    ``raw`` joins triangles sharing vertices; ``linked`` also joins vertices
    closer than one cell diagonal, which reconnects sheets that meet in
    isolated singular points the sampled mesh cannot resolve.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components
    from scipy.spatial import cKDTree
    from skimage.measure import marching_cubes

    fn = sympy.lambdify((X, Y, Z), sym(text), "numpy")
    bounds = [(float(Fraction(a)), float(Fraction(b))) for a, b in box]
    axes = [np.linspace(a, b, n) for a, b in bounds]
    V = fn(*np.meshgrid(*axes, indexing="ij")).astype(float)
    spacing = [(b - a) / (n - 1) for a, b in bounds]
    verts, faces, _, _ = marching_cubes(V, 0.0, spacing=spacing)
    nv = len(verts)
    h = float(np.sqrt(sum(s * s for s in spacing)))
    r = np.concatenate([faces[:, 0], faces[:, 1], faces[:, 2]])
    c = np.concatenate([faces[:, 1], faces[:, 2], faces[:, 0]])
    raw, _ = connected_components(coo_matrix((np.ones(len(r)), (r, c)), shape=(nv, nv)),
                                  directed=False)
    pairs = cKDTree(verts).query_pairs(h, output_type="ndarray")
    r2 = np.concatenate([r, pairs[:, 0]])
    c2 = np.concatenate([c, pairs[:, 1]])
    linked, _ = connected_components(coo_matrix((np.ones(len(r2)), (r2, c2)), shape=(nv, nv)),
                                     directed=False)
    return raw, linked


# --- distance brackets -------------------------------------------------------

@lru_cache(maxsize=None)
def _expr(text: str) -> sympy.Expr:
    return sym(text)


def _has_root_on_segment(expr, point, direction, eps) -> bool:
    """Whether ``expr`` vanishes on ``point + t*direction``, ``|t| <= eps``,
    decided by exact real-root counting."""
    t = sympy.Symbol("t")
    sub = {v: sympy.Rational(str(p)) + t * d for v, p, d in zip((X, Y, Z), point, direction)}
    e = sympy.expand(expr.subs(sub))
    if e == 0:
        return True
    P = sympy.Poly(e, t)
    if P.degree() <= 0:
        return False
    r = sympy.Rational(eps)
    return P.count_roots(-r, r) > 0


_DIRECTIONS = {
    2: [(0, 1), (1, 0), (1, 1), (1, -1)],
    3: [(0, 0, 1), (1, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, -1, 0),
        (1, 0, -1), (0, 1, -1)],
}


def within_eps(text: str, point, eps) -> bool:
    """True when a point of the variety lies within ``eps`` of ``point``:
    some axis or diagonal segment of half-length ``eps / |d|`` through the
    point contains a root (certified by Sturm counting in sympy)."""
    expr = _expr(text)
    eps = Fraction(eps)
    for d in _DIRECTIONS[len(point)]:
        norm2 = sum(v * v for v in d)
        # a diagonal segment parameter t moves by |t|*sqrt(norm2); scale down
        scale = {1: 1, 2: Fraction(7, 10), 3: Fraction(57, 100)}[norm2]
        if _has_root_on_segment(expr, [F(p) for p in point], d, eps * scale):
            return True
    return False


def fibre_root_count(text: str, x0, lo, hi) -> int:
    """Real roots of ``g(x0, y)`` in the open interval ``(lo, hi)``."""
    e = sympy.expand(_expr(text).subs(X, sympy.Rational(x0)))
    if e == 0:
        raise ValueError("vertical line in the fibre")
    P = sympy.Poly(e, Y)
    if P.degree() <= 0:
        return 0
    a, b = sympy.Rational(lo), sympy.Rational(hi)
    n = P.count_roots(a, b)
    return n - (P.eval(a) == 0) - (P.eval(b) == 0)
