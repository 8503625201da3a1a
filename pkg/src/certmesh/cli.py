"""Command line front end.

::

    certmesh MODE -f POLY --box BOX [--eps EPS] [-o OUT] [--format FMT]

``MODE`` is one of ``curve-topology``, ``curve-mesh``, ``surface-topology``
and ``surface-mesh`` (also accepted as ``--mode``).  Curves take a 2-D box,
surfaces a 3-D one.  The artifact goes to ``OUT`` or to standard output;
a one-line summary goes to standard error.  Failures exit with the code of
their error class (see ``certmesh --help``).

>>> main(["curve-topology", "-f", "x^2 + y^2 - 1", "--box", "[-2,2]x[-2,2]",
...       "--quiet", "-o", "/dev/null"])
0
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import EXIT_CODES, CertmeshError, DimensionMismatch, ParseError
from .interval import Box, as_box, parse_box
from .ratpoly import (Polynomial, Q, flint_factor_hook, parse_polynomial,
                      square_free_part)

__all__ = ["JobSpec", "run", "main", "build_parser"]

log = logging.getLogger("certmesh")

MODES = ("curve-topology", "curve-mesh", "surface-topology", "surface-mesh")
_FORMATS = {
    "curve-topology": ("json", "svg"),
    "curve-mesh": ("json", "svg"),
    "surface-topology": ("json", "obj"),
    "surface-mesh": ("json", "obj"),
}


@dataclass
class JobSpec:
    """One invocation: what to compute and where to put it.

    ``factors`` is ``"auto"`` (irreducible factorization), ``"partial"``
    (square-free splitting only) or a list of polynomials whose product is
    the input up to a constant.
    """

    poly: Polynomial
    box: Box
    mode: str
    eps: object = None
    factors: object = "auto"
    fmt: str = "json"
    out: str | None = None
    debug_layers: bool = False
    threads: int = 1

    def __post_init__(self):
        self.poly = Polynomial(self.poly)
        self.box = as_box(self.box)
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        want = 2 if self.mode.startswith("curve") else 3
        if len(self.box.dims) != want:
            raise DimensionMismatch(
                f"{self.mode} needs a {want}-dimensional box, got {len(self.box.dims)}")
        if self.mode.endswith("mesh") and self.eps is None:
            raise ValueError(f"{self.mode} needs --eps")
        if self.fmt not in _FORMATS[self.mode]:
            raise ValueError(f"{self.mode} writes {' or '.join(_FORMATS[self.mode])}, "
                             f"not {self.fmt}")


def _factor_hook(spec: JobSpec):
    if spec.factors == "auto":
        return flint_factor_hook
    if spec.factors == "partial":
        return None
    given = [Polynomial(p) for p in spec.factors]
    prod = Polynomial(1)
    for p in given:
        prod = prod * p
    target = spec.poly
    ratio = None
    for k, v in target.terms.items():
        ratio = prod.terms.get(k, Q(0)) / v
        break
    if ratio is None or ratio == 0 or prod != target * Polynomial(ratio):
        raise ParseError("the product of --factors differs from the polynomial")

    def hook(p: Polynomial) -> list:
        if p == spec.poly or p * Polynomial(ratio) == prod:
            return [(q, 1) for q in given]
        return flint_factor_hook(p)

    return hook


def run(spec: JobSpec) -> tuple:
    """Compute the artifact of ``spec``; returns ``(text, summary, layers)``
    where ``layers`` maps file suffixes to extra OBJ texts."""
    layers: dict = {}
    # checked in every mode; only the surface mesher consumes the factors
    hook = _factor_hook(spec)
    if spec.mode == "curve-topology":
        from .curvetop import curve_topology
        eps = spec.eps if spec.eps is not None else spec.box.length / 8
        G = curve_topology(spec.poly, spec.box, eps)
        text = G.to_json() if spec.fmt == "json" else G.to_svg(show_boxes=spec.debug_layers)
        crit = sum(1 for p in G.points if p.on_gv)
        summary = f"{len(G.points)} points, {len(G.edges)} edges, {crit} curve points"
    elif spec.mode == "curve-mesh":
        from .curvemesh import curve_mesh
        M = curve_mesh(spec.poly, spec.box, spec.eps)
        if spec.fmt == "json":
            text = M.to_json()
        else:
            text = M.to_svg(layers=("boxes", "segregating", "stitches") if spec.debug_layers
                            else ("boxes",))
        summary = (f"{len(M.vertices)} vertices, {len(M.edges)} edges, "
                   f"{M.num_components()} components, {M.num_cycles()} cycles")
    elif spec.mode == "surface-topology":
        from .surftop import surface_topology
        T = surface_topology(spec.poly, spec.box, spec.eps)
        text = T.to_json() if spec.fmt == "json" else T.to_obj()
        summary = (f"V {len(T.points)} E {len(T.edges)} F {len(T.faces)}, "
                   f"chi {T.euler_characteristic()}, {T.num_components()} components")
    else:
        from .surfmesh import surface_mesh
        M = surface_mesh(spec.poly, spec.box, spec.eps, hook=hook)
        text = M.to_json() if spec.fmt == "json" else M.to_obj()
        if spec.debug_layers:
            for name, part in M.parts.items():
                layers[name] = part.to_obj()
        summary = (f"V {len(M.points)} E {len(M.edges)} F {len(M.faces)}, "
                   f"chi {M.euler_characteristic()}, {M.num_components()} components, "
                   f"watertight {M.is_watertight()}")
    return text, summary, layers


def _exit_table() -> str:
    return "\n".join(f"  {code:>3}  {name}" for code, name in sorted(EXIT_CODES.items()))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="certmesh",
        description="Certified topology and epsilon-meshes of algebraic plane curves "
                    "and surfaces.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="exit codes:\n" + _exit_table()
               + "\n  (command-line usage errors also exit with 2)\n\nexample:\n"
               '  certmesh surface-topology -f "x^2+y^2+z^2-1" '
               '--box "[-2,2]x[-2,2]x[-2,2]" -o sphere.obj')
    p.add_argument("mode_pos", nargs="?", choices=MODES, metavar="MODE",
                   help="one of: " + ", ".join(MODES))
    p.add_argument("--mode", choices=MODES, help="same as MODE")
    p.add_argument("-f", "--poly", required=True, help='polynomial, e.g. "x^2+y^2-1"')
    p.add_argument("--box", required=True, help='box, e.g. "[-2,2]x[-2,2]"')
    p.add_argument("--eps", help="accuracy (rational); required for mesh modes")
    p.add_argument("--factors", default="auto",
                   help='"auto" (irreducible factorization, default), "partial" '
                        '(square-free splitting only) or factors separated by ";"')
    p.add_argument("-o", "--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=("json", "svg", "obj"),
                   help="output format (default: from the file suffix, else json)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker cap (the pipeline runs sequentially)")
    p.add_argument("--strip-square", action="store_true",
                   help="replace the polynomial by its square-free part")
    p.add_argument("--debug-layers", action="store_true",
                   help="SVG: all box layers; surface-mesh: also write the singular "
                        "and smooth parts as OUT.singular.obj and OUT.smooth.obj")
    p.add_argument("--quiet", action="store_true", help="no summary on standard error")
    return p


def _spec_from_args(args, parser) -> JobSpec:
    mode = args.mode or args.mode_pos
    if mode is None:
        parser.error("a mode is required")
    if args.mode and args.mode_pos and args.mode != args.mode_pos:
        parser.error("conflicting modes")
    poly = parse_polynomial(args.poly)
    if args.strip_square:
        sq = square_free_part(poly)
        if sq != poly:
            log.warning("replacing the polynomial by its square-free part %s", sq.expand_str())
        poly = sq
    box = parse_box(args.box)
    fmt = args.format
    if fmt is None:
        suffix = Path(args.out).suffix.lstrip(".").lower() if args.out else ""
        fmt = suffix if suffix in ("json", "svg", "obj") else "json"
    factors = args.factors
    if factors not in ("auto", "partial"):
        factors = [parse_polynomial(t) for t in factors.split(";") if t.strip()]
    eps = Q(args.eps) if args.eps is not None else None
    if eps is not None and eps <= 0:
        parser.error("--eps must be positive")
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return JobSpec(poly, box, mode, eps, factors, fmt, args.out, args.debug_layers,
                       args.threads)
    except ValueError as e:
        parser.error(str(e))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(format="certmesh: %(message)s",
                        level=logging.ERROR if args.quiet else logging.INFO)
    try:
        spec = _spec_from_args(args, parser)
        text, summary, layers = run(spec)
    except CertmeshError as e:
        log.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    if spec.out:
        Path(spec.out).write_text(text)
        for name, obj in layers.items():
            Path(spec.out).with_suffix(f".{name}.obj").write_text(obj)
    else:
        sys.stdout.write(text)
    log.info("%s: %s", spec.mode, summary)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
