"""Fixed inputs shared by the tests."""

CURVES = {
    "line": "y - x",
    "circle": "16*x^2 + 16*y^2 - 49",
    "node": "y^2 - x^2 - x^3",
    "cusp": "y^2 - x^3",
    "tacnode": "y^2 - x^4 + x^5",
    "figure-eight": "x^4 - x^2 + y^2",
}
CURVE_BOX = "[-2,2]x[-2,2]"

SURFACES = {
    "S1": ("x^4+y^4+z^4-x^2-y^2-z^2-x^2*y^2-x^2*z^2-y^2*z^2+1",
           "[-3/2,3/2]x[-5/4,5/4]x[-2,2]"),
    "S2": ("-1+27/2*z^2*y^2*x^2-27/2*x^2*y^2-6*x^2*z^2-27/2*y^2*z^2+3*x^2+3*z^2"
           "+27/4*y^2-3*x^4-243/16*y^4-3*z^4+x^6+729/64*y^6+z^6+27/4*x^4*y^2"
           "+3*x^4*z^2+243/16*x^2*y^4+3*x^2*z^4+243/16*z^2*y^4+27/4*z^4*y^2"
           "-x^2*z^3-9/80*y^2*z^3",
           "[-2,2]x[-2,2]x[-4,4]"),
    "S3": ("-2*y^4+2*y^2*z^2+y^2+z^4-2*z^2+x^6+3*x^4*y^2-3*x^4+3*x^2*y^4-6*x^2*y^2"
           "+3*x^2+y^6",
           "[-2,2]x[-2,2]x[-2,2]"),
    "S4": ("x^2*y^2+y^2*z^2+z^2*x^2-7/2*x*y*z", "[-2,2]x[-2,2]x[-2,2]"),
    "S5": ("16-2*x^2*z^2-8*z^2+4*x^3-x^5+1/4*x^6+x^4+y^4+y^2*x^3+z^4+z^2*x^3"
           "-2*x^2*y^2+2*y^2*z^2-8*x^2-8*y^2",
           "[-2,2]x[-3,3]x[-6,6]"),
    "sphere": ("x^2+y^2+z^2-1", "[-2,2]x[-2,2]x[-2,2]"),
    "torus": ("(x^2+y^2+z^2+1-1/9)^2-4*(x^2+y^2)", "[-2,2]x[-2,2]x[-2,2]"),
}


def box_pairs(text: str) -> list:
    """``"[a,b]x[c,d]"`` as a list of string pairs (independent of the package)."""
    return [tuple(part.strip("[] ").split(",")) for part in text.split("]x[")]
