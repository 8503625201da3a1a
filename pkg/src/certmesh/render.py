"""Decimal rendering of exact rationals and shared emitter helpers.

Coordinates are written as the shortest decimal lying inside the
certifying interval, so a reader can see at a glance how well a value is
known, while the exact interval is kept next to it.

>>> from certmesh.render import shortest_decimal
>>> shortest_decimal(Q("1/3"), Q("1/4"), Q("1/2"))
'0.3'
>>> shortest_decimal(Q("7/4"))
'1.75'
"""

from __future__ import annotations

import json

from .ratpoly import Q

__all__ = ["shortest_decimal", "dump_json", "svg_open", "svg_path", "svg_rect",
           "svg_circle", "SCHEMA_VERSION", "Q"]

#: version tag written into every JSON document
SCHEMA_VERSION = 1

_MAX_DIGITS = 30


def shortest_decimal(value, lo=None, hi=None) -> str:
    """Shortest decimal string in ``[lo, hi]`` (defaults to ``value`` itself;
    a non-terminating exact value is cut at 30 fractional digits)."""
    value = Q(value)
    lo = value if lo is None else Q(lo)
    hi = value if hi is None else Q(hi)
    for digits in range(_MAX_DIGITS + 1):
        scale = 10 ** digits
        # candidates closest to value with this many digits
        n = value * scale
        k = int(n.floor())
        for cand in sorted((k, k + 1), key=lambda t: abs(Q(t) / scale - value)):
            c = Q(cand) / scale
            if lo <= c <= hi:
                return _fmt(cand, digits)
    k = int((value * 10 ** _MAX_DIGITS).floor())
    return _fmt(k, _MAX_DIGITS)


def _fmt(k: int, digits: int) -> str:
    neg = k < 0
    s = str(abs(k)).rjust(digits + 1, "0")
    if digits:
        s = s[:-digits] + "." + s[-digits:]
        s = s.rstrip("0").rstrip(".")
    if s in ("", "-"):
        s = "0"
    return ("-" + s) if neg and s != "0" else s


def dump_json(doc: dict) -> str:
    """Deterministic JSON text (sorted keys, fixed separators)."""
    return json.dumps(doc, sort_keys=True, indent=1, separators=(",", ": ")) + "\n"


# SVG drawings use the box itself as the view box, with y negated so that
# the picture is upright; strokes do not scale with the view box.

def _num(v) -> str:
    return f"{float(v):.9g}"


def svg_open(box, width: int = 600) -> list:
    """Opening lines of an SVG document whose view box is the planar
    ``box``, with a frame around it."""
    X1, X2 = box[0].lo, box[0].hi
    Y1, Y2 = box[1].lo, box[1].hi
    W, H = X2 - X1, Y2 - Y1
    height = max(1, int(round(width * float(H) / float(W))))
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="{_num(X1)} {_num(-Y2)} {_num(W)} {_num(H)}">',
            f'<rect x="{_num(X1)}" y="{_num(-Y2)}" width="{_num(W)}" height="{_num(H)}" '
            'fill="white" stroke="black" vector-effect="non-scaling-stroke"/>']


def svg_path(p, q, style: str) -> str:
    """A straight segment from ``p`` to ``q``."""
    return (f'<path d="M {_num(p[0])} {_num(-p[1])} L {_num(q[0])} {_num(-q[1])}" '
            f'style="{style}" vector-effect="non-scaling-stroke"/>')


def svg_rect(B, style: str) -> str:
    return (f'<rect x="{_num(B[0].lo)}" y="{_num(-B[1].hi)}" width="{_num(B[0].width)}" '
            f'height="{_num(B[1].width)}" {style} vector-effect="non-scaling-stroke"/>')


def svg_circle(p, r) -> str:
    return f'<circle cx="{_num(p[0])}" cy="{_num(-p[1])}" r="{_num(r)}"/>'
