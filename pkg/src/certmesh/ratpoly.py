"""Exact sparse polynomials over the rationals in the variables ``x, y, z``.

The variable order is fixed globally as ``(x, y, z)``; elimination always
removes ``z`` first and then ``y``.  Arithmetic, gcds, resultants and
factorization are delegated to FLINT through ``python-flint``; this module
adds the conventions the geometric algorithms rely on (constant-argument
resultants, content splitting, the partial factorization default) and a
small text grammar.

Examples
========

>>> from certmesh.ratpoly import Polynomial, resultant
>>> p = Polynomial("z^2 + x^2 + y^2 - 1")
>>> print(resultant(p, p.diff("z"), "z"))
4*x^2 + 4*y^2 - 4
>>> print(Polynomial("(x - y)^2").expand_str())
x^2 - 2*x*y + y^2
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import flint

from .errors import DegreeTooLow, ParseError, ZeroPolynomial

__all__ = [
    "VARS", "CTX", "Rational", "Q", "Polynomial", "FactorList",
    "resultant", "discriminant", "square_free_part", "split_content",
    "factorize", "flint_factor_hook", "gcd", "parse_polynomial",
    "normalize", "var_index",
]

VARS = ("x", "y", "z")
CTX = flint.fmpq_mpoly_ctx.get(VARS, "lex")
Rational = flint.fmpq

_GENS = CTX.gens()


def Q(value) -> flint.fmpq:
    """Coerce ``value`` to an exact rational.

    Accepts ints, :class:`fractions.Fraction`, FLINT rationals/integers and
    strings such as ``"-7/2"``.  Floats are rejected on purpose.

    >>> Q("-7/2"), Q(3)
    (-7/2, 3)
    """
    if isinstance(value, flint.fmpq):
        return value
    if isinstance(value, (int, flint.fmpz)):
        return flint.fmpq(value)
    if isinstance(value, Fraction):
        return flint.fmpq(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return flint.fmpq(int(num), int(den))
        return flint.fmpq(int(text))
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def var_index(var) -> int:
    if isinstance(var, int):
        return var
    try:
        return VARS.index(var)
    except ValueError:
        raise ValueError(f"unknown variable {var!r}; expected one of {VARS}")


def _raw(value) -> flint.fmpq_mpoly:
    if isinstance(value, Polynomial):
        return value._p
    if isinstance(value, flint.fmpq_mpoly):
        return value
    if isinstance(value, str):
        return parse_polynomial(value)._p
    return CTX.from_dict({(0, 0, 0): Q(value)}) if Q(value) != 0 else CTX.from_dict({})


class Polynomial:
    """Immutable polynomial in ``Q[x, y, z]``.

    Terms are stored as a map from exponent vectors ``(i, j, k)`` to nonzero
    rational coefficients; the zero polynomial has no terms.

    >>> p = Polynomial({(2, 0, 0): 1, (0, 0, 0): -2})
    >>> p
    Polynomial('x^2 - 2')
    >>> p.degree("x"), p.evaluate((Q(3), 0, 0))
    (2, 7)
    """

    __slots__ = ("_p", "_hash")

    def __init__(self, value=0):
        if isinstance(value, Mapping):
            data = {tuple(k): Q(v) for k, v in value.items() if Q(v) != 0}
            for k in data:
                if len(k) != 3:
                    raise ValueError("exponent vectors must have length 3")
            self._p = CTX.from_dict(data)
        else:
            self._p = _raw(value)
        self._hash = None

    # construction helpers -------------------------------------------------
    @classmethod
    def gen(cls, var) -> "Polynomial":
        return cls(_GENS[var_index(var)])

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls(Q(c))

    @property
    def raw(self) -> flint.fmpq_mpoly:
        """The underlying FLINT polynomial (treat as read-only)."""
        return self._p

    @property
    def terms(self) -> dict:
        return {tuple(int(e) for e in k): v for k, v in self._p.to_dict().items()}

    # predicates and degrees ------------------------------------------------
    def is_zero(self) -> bool:
        return self._p.is_zero()

    def is_constant(self) -> bool:
        return self._p.is_constant()

    def degree(self, var) -> int:
        """Degree in ``var``; the zero polynomial has degree -1."""
        if self._p.is_zero():
            return -1
        return int(self._p.degrees()[var_index(var)])

    def degrees(self) -> tuple:
        return tuple(self.degree(v) for v in VARS)

    def total_degree(self) -> int:
        return -1 if self._p.is_zero() else int(self._p.total_degree())

    def variables(self) -> tuple:
        """Names of the variables that actually occur."""
        return tuple(v for v in VARS if self.degree(v) > 0)

    # arithmetic --------------------------------------------------------------
    def __add__(self, other):
        return Polynomial(self._p + _raw(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Polynomial(self._p - _raw(other))

    def __rsub__(self, other):
        return Polynomial(_raw(other) - self._p)

    def __mul__(self, other):
        return Polynomial(self._p * _raw(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Polynomial(-self._p)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        return Polynomial(self._p ** n)

    def exact_div(self, other) -> "Polynomial":
        """Exact quotient; raises ``ValueError`` when ``other`` does not divide."""
        q, r = divmod(self._p, _raw(other))
        if not r.is_zero():
            raise ValueError("division is not exact")
        return Polynomial(q)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._p == other._p
        try:
            return self._p == _raw(other)
        except (TypeError, ValueError, ParseError):
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(sorted((k, (int(v.p), int(v.q)))
                                           for k, v in self.terms.items())))
        return self._hash

    # calculus and evaluation -------------------------------------------------
    def diff(self, var) -> "Polynomial":
        return Polynomial(self._p.derivative(var_index(var)))

    def coefficients(self, var) -> list:
        """Coefficients ``[c_0, c_1, ...]`` of ``self`` as a polynomial in ``var``."""
        i = var_index(var)
        d = self.degree(var)
        if d < 0:
            return []
        buckets = [dict() for _ in range(d + 1)]
        for k, v in self._p.to_dict().items():
            k = tuple(int(e) for e in k)
            e = k[i]
            kk = list(k)
            kk[i] = 0
            buckets[e][tuple(kk)] = v
        return [Polynomial(CTX.from_dict(b)) for b in buckets]

    def leading_coefficient(self, var) -> "Polynomial":
        """Coefficient of the highest power of ``var`` (a polynomial)."""
        cs = self.coefficients(var)
        return cs[-1] if cs else Polynomial(0)

    def subs(self, mapping: Mapping) -> "Polynomial":
        """Substitute rational values for some variables.

        >>> print(Polynomial("x*y + z").subs({"x": 2, "z": Q("1/2")}))
        2*y + 1/2
        """
        if not mapping:
            return self
        return Polynomial(self._p.subs({k: Q(v) for k, v in mapping.items()}))

    def evaluate(self, point: Sequence) -> flint.fmpq:
        """Exact value at a rational point ``(x, y, z)``; missing trailing
        coordinates default to zero."""
        pt = [Q(v) for v in point] + [Q(0)] * (3 - len(point))
        return self._p(*pt)

    def __call__(self, *point):
        return self.evaluate(point)

    def shift(self, shifts: Sequence) -> "Polynomial":
        """Return ``p(x + s0, y + s1, z + s2)``."""
        s = [Q(v) for v in shifts] + [Q(0)] * (3 - len(shifts))
        return Polynomial(self._p.compose(*[g + c for g, c in zip(_GENS, s)]))

    # printing ------------------------------------------------------------------
    def expand_str(self) -> str:
        """Canonical text form; :func:`parse_polynomial` inverts it exactly."""
        items = sorted(self.terms.items(), reverse=True)
        if not items:
            return "0"
        out = []
        for idx, (exp, c) in enumerate(items):
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in zip(VARS, exp) if e)
            neg = c < 0
            a = -c if neg else c
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            if idx == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    __str__ = expand_str

    def __repr__(self):
        return f"Polynomial({self.expand_str()!r})"


def normalize(p) -> Polynomial:
    """Scale ``p`` to coprime integer coefficients with positive leading
    coefficient in the lex order ``x > y > z``."""
    raw = _raw(p)
    if raw.is_zero():
        return Polynomial(raw)
    d = raw.to_dict()
    den = 1
    num_gcd = 0
    for v in d.values():
        den = den * int(v.q) // _igcd(den, int(v.q))
    for v in d.values():
        num_gcd = _igcd(num_gcd, int(v.p * den // v.q))
    lead = d[max(d)]
    scale = flint.fmpq(den, num_gcd)
    if lead < 0:
        scale = -scale
    return Polynomial(raw * scale)


def _igcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


# ---------------------------------------------------------------------------
# elimination
# ---------------------------------------------------------------------------

def resultant(p, q, var) -> Polynomial:
    """Sylvester resultant of ``p`` and ``q`` eliminating ``var``.

    A constant (in ``var``) argument follows ``Res(p, c) = c^deg(p)``, and two
    constants give ``1``.  The sign follows the Sylvester matrix with the
    coefficients of ``p`` in the first rows.

    >>> print(resultant(Polynomial("y - x"), Polynomial("y + x"), "y"))
    2*x
    >>> print(resultant(Polynomial("x^3 + x"), 5, "x"))
    125
    """
    i = var_index(var)
    P, R = Polynomial(p), Polynomial(q)
    if P.is_zero() or R.is_zero():
        return Polynomial(0)
    dp, dq = P.degree(i), R.degree(i)
    if dp == 0 and dq == 0:
        return Polynomial(1)
    if dq == 0:
        return R ** dp
    if dp == 0:
        return P ** dq
    return Polynomial(P.raw.resultant(R.raw, VARS[i]))


def discriminant(p, var) -> Polynomial:
    """``Res(p, dp/dvar, var)`` without sign or leading-coefficient
    normalization; only its zero set is used downstream.

    >>> print(discriminant(Polynomial("z^2 - x"), "z"))
    -4*x
    """
    P = Polynomial(p)
    if P.degree(var) < 2:
        raise DegreeTooLow(f"degree in {var} is {P.degree(var)} < 2")
    return resultant(P, P.diff(var), var)


def gcd(p, q) -> Polynomial:
    return Polynomial(_raw(p).gcd(_raw(q)))


def square_free_part(p) -> Polynomial:
    """Product of the distinct irreducible factors of ``p``, normalized.

    >>> print(square_free_part(Polynomial("(x^2 + y^2 - 1)^2*(x - y)")))
    x^3 - x^2*y + x*y^2 - x - y^3 + y
    """
    raw = _raw(p)
    if raw.is_zero():
        raise ZeroPolynomial("square-free part of the zero polynomial")
    _, facs = raw.factor_squarefree()
    out = CTX.from_dict({(0, 0, 0): 1})
    for f, _m in facs:
        out = out * f
    return normalize(out)


def split_content(p, content_vars: Iterable) -> tuple:
    """Split ``p = content * primitive`` where ``content`` is the gcd of the
    coefficients of ``p`` viewed as a polynomial in the variables *not* in
    ``content_vars``.  ``content`` thus depends only on ``content_vars``.

    >>> c, q = split_content(Polynomial("x*y*(16*x^2 + 16*y^2 - 49)"), ["x"])
    >>> print(c); print(q)
    x
    16*x^2*y + 16*y^3 - 49*y
    """
    raw = _raw(p)
    if raw.is_zero():
        raise ZeroPolynomial("content of the zero polynomial")
    keep = {var_index(v) for v in content_vars}
    main = [i for i in range(3) if i not in keep]
    groups: dict = {}
    for k, v in raw.to_dict().items():
        k = tuple(int(e) for e in k)
        key = tuple(k[i] for i in main)
        kk = tuple(k[i] if i in keep else 0 for i in range(3))
        groups.setdefault(key, {})[kk] = v
    g = None
    for d in groups.values():
        c = CTX.from_dict(d)
        g = c if g is None else g.gcd(c)
        if g.is_constant():
            break
    content = normalize(g)
    if content.is_constant():
        content = Polynomial(1)
    primitive = Polynomial(raw).exact_div(content)
    return content, primitive


# ---------------------------------------------------------------------------
# factorization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FactorList:
    """``unit * prod(f**m for f, m in factors)`` equals the factored input.

    ``partial`` is true when the factors are only known to be square-free
    and pairwise coprime, not irreducible.
    """

    factors: tuple
    unit: flint.fmpq = field(default_factory=lambda: flint.fmpq(1))
    partial: bool = True

    def product(self) -> Polynomial:
        out = Polynomial(self.unit)
        for f, m in self.factors:
            out = out * f ** m
        return out

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)


FactorHook = Callable[[Polynomial], Sequence]


def flint_factor_hook(p: Polynomial) -> list:
    """Irreducible factorization over Q using FLINT."""
    _, facs = p.raw.factor()
    return [(Polynomial(f), int(m)) for f, m in facs]


def _content_split_all(p: Polynomial) -> list:
    """Split ``p`` along single-variable and two-variable contents."""
    pending = [p]
    done = []
    while pending:
        q = pending.pop()
        if q.is_constant():
            continue
        split = False
        for keep in (("x",), ("y",), ("z",), ("x", "y"), ("x", "z"), ("y", "z")):
            if not all(q.degree(v) == 0 for v in VARS if v not in keep):
                c, r = split_content(q, keep)
                if not c.is_constant() and not r.is_constant():
                    pending.extend([c, r])
                    split = True
                    break
        if not split:
            done.append(q)
    return done


def factorize(p, hook: FactorHook | None = None) -> FactorList:
    """Multiplicative decomposition of ``p``.

    With ``hook`` the factors come from it and are trusted to be
    irreducible.  Without a hook the result is the square-free decomposition
    refined by content splitting: square-free, pairwise coprime factors that
    may still be reducible, flagged ``partial``.

    >>> fl = factorize(Polynomial("x*y"))
    >>> sorted(str(f) for f, _ in fl.factors), fl.partial
    (['x', 'y'], True)
    """
    P = Polynomial(p)
    if P.is_zero():
        raise ZeroPolynomial("cannot factor the zero polynomial")
    if hook is not None:
        raw = [(normalize(f), int(m)) for f, m in hook(P) if not Polynomial(f).is_constant()]
        partial = False
    else:
        raw = []
        _, facs = P.raw.factor_squarefree()
        for f, m in facs:
            for piece in _content_split_all(Polynomial(f)):
                raw.append((normalize(piece), int(m)))
        partial = True
    raw.sort(key=lambda t: (t[0].total_degree(), t[0].expand_str()))
    prod = Polynomial(1)
    for f, m in raw:
        prod = prod * f ** m
    if prod.is_zero():
        raise ZeroPolynomial("hook returned a zero factor")
    # unit = p / prod must be a constant
    q, r = divmod(P.raw, prod.raw)
    if not r.is_zero() or not q.is_constant():
        raise ValueError("factor hook result does not multiply back to the input")
    unit = q.to_dict().get((0, 0, 0), flint.fmpq(0))
    return FactorList(tuple(raw), unit, partial)


# ---------------------------------------------------------------------------
# text grammar
# ---------------------------------------------------------------------------

class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def where(self, pos: int) -> tuple:
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, msg: str, pos: int | None = None):
        line, col = self.where(self.pos if pos is None else pos)
        raise ParseError(msg, line, col)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        if self.pos >= len(self.text):
            return ""
        if self.text.startswith("**", self.pos):
            return "^"
        return self.text[self.pos]

    def take(self) -> str:
        ch = self.peek()
        self.pos += 2 if self.text.startswith("**", self.pos) else 1
        return ch

    def integer(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an integer")
        return int(self.text[start:self.pos])


def parse_polynomial(text: str) -> Polynomial:
    """Parse the polynomial grammar: rational numbers, ``x y z``,
    ``+ - *``, ``^`` (or ``**``) with nonnegative integer exponents,
    parentheses, and division by nonzero constants.

    >>> print(parse_polynomial("x^2*y^2 + y^2*z^2 + z^2*x^2 - 7/2*x*y*z"))
    x^2*y^2 + x^2*z^2 - 7/2*x*y*z + y^2*z^2
    >>> parse_polynomial("x +* y")
    Traceback (most recent call last):
    ...
    certmesh.errors.ParseError: unexpected '*' (line 1, column 4)
    """
    lx = _Lexer(text)

    def expr():
        sign = 1
        if lx.peek() in "+-" and lx.peek():
            sign = -1 if lx.take() == "-" else 1
        acc = term() * sign
        while lx.peek() in ("+", "-") and lx.peek():
            op = lx.take()
            rhs = term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term():
        acc = power()
        while True:
            ch = lx.peek()
            if ch == "*":
                lx.take()
                acc = acc * power()
            elif ch == "/":
                pos = lx.pos
                lx.take()
                d = power()
                if not d.is_constant() or d.is_zero():
                    lx.error("division only by nonzero constants", pos)
                acc = acc * Polynomial(1 / d.raw.to_dict()[(0, 0, 0)])
            elif ch and (ch.isalpha() or ch == "(" or ch.isdigit()):
                # implicit multiplication, e.g. "2x" or "(x+1)(x-1)"
                acc = acc * power()
            else:
                return acc

    def power():
        base = atom()
        if lx.peek() == "^":
            lx.take()
            if lx.peek() == "(":
                lx.take()
                n = lx.integer()
                if lx.peek() != ")":
                    lx.error("expected ')'")
                lx.take()
            else:
                n = lx.integer()
            base = base ** n
        return base

    def atom():
        ch = lx.peek()
        if not ch:
            lx.error("unexpected end of input")
        if ch == "(":
            lx.take()
            inner = expr()
            if lx.peek() != ")":
                lx.error("expected ')'")
            lx.take()
            return inner
        if ch.isdigit():
            return Polynomial(lx.integer())
        if ch in VARS:
            lx.take()
            nxt = lx.text[lx.pos:lx.pos + 1]
            if nxt.isalnum() or nxt == "_":
                lx.error(f"unknown identifier starting with {ch!r}", lx.pos - 1)
            return Polynomial.gen(ch)
        if ch in "+-":
            # unary sign inside a factor, e.g. "x*-y"
            lx.take()
            inner = power()
            return -inner if ch == "-" else inner
        lx.error(f"unexpected {ch!r}")

    if not text.strip():
        raise ParseError("empty polynomial", 1, 1)
    result = expr()
    if lx.peek():
        lx.error(f"unexpected {lx.peek()!r}")
    return result
