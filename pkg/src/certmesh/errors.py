"""Typed failures raised by the certified topology and meshing pipeline.

Every error carries a stable ``exit_code`` used by the command line front
end, so scripted callers can tell a rejected input apart from an internal
failure without parsing messages.
"""

from __future__ import annotations


class CertmeshError(Exception):
    """Base class of all pipeline errors."""

    exit_code = 1

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details


class ParseError(CertmeshError):
    """Malformed polynomial or box text.

    ``line`` and ``column`` are 1-based positions of the offending token.
    """

    exit_code = 2

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})",
                         line=line, column=column)
        self.line = line
        self.column = column


class DimensionMismatch(CertmeshError):
    exit_code = 3


class ZeroPolynomial(CertmeshError):
    exit_code = 4


class DegreeTooLow(CertmeshError):
    exit_code = 5


class NotSquareFree(CertmeshError):
    exit_code = 10


class VerticalLineContained(CertmeshError):
    """The surface contains a line parallel to the z-axis inside the box."""

    exit_code = 11


class FactorizationRequired(CertmeshError):
    """A vanishing resultant needs an irreducible factorization to proceed."""

    exit_code = 12


class BoundaryContactUnresolved(CertmeshError):
    """The variety touches the box boundary in a way that is not handled.

    Enlarging or slightly shifting the box removes the contact.
    """

    exit_code = 13


class DegenerateInZ(CertmeshError):
    exit_code = 14


class DegenerateProjection(CertmeshError):
    exit_code = 15


class NonSquareFreeLevel(CertmeshError):
    exit_code = 20


class ZeroLevelPolynomial(CertmeshError):
    exit_code = 21


class SegregationFailed(CertmeshError):
    exit_code = 22


class RegionNotRegular(CertmeshError):
    exit_code = 23


class MonotonicityViolated(CertmeshError):
    exit_code = 24


class InconsistentAdjacency(CertmeshError):
    exit_code = 25


class AdjacencyMismatch(CertmeshError):
    exit_code = 26


class InternalInvariantViolation(CertmeshError):
    exit_code = 30


#: Exit code table shown by ``certmesh --help``.
EXIT_CODES = {
    0: "success",
    1: "unclassified error",
    ParseError.exit_code: "ParseError",
    DimensionMismatch.exit_code: "DimensionMismatch",
    ZeroPolynomial.exit_code: "ZeroPolynomial",
    DegreeTooLow.exit_code: "DegreeTooLow",
    NotSquareFree.exit_code: "NotSquareFree",
    VerticalLineContained.exit_code: "VerticalLineContained",
    FactorizationRequired.exit_code: "FactorizationRequired",
    BoundaryContactUnresolved.exit_code: "BoundaryContactUnresolved",
    DegenerateInZ.exit_code: "DegenerateInZ",
    DegenerateProjection.exit_code: "DegenerateProjection",
    NonSquareFreeLevel.exit_code: "NonSquareFreeLevel",
    ZeroLevelPolynomial.exit_code: "ZeroLevelPolynomial",
    SegregationFailed.exit_code: "SegregationFailed",
    RegionNotRegular.exit_code: "RegionNotRegular",
    MonotonicityViolated.exit_code: "MonotonicityViolated",
    InconsistentAdjacency.exit_code: "InconsistentAdjacency",
    AdjacencyMismatch.exit_code: "AdjacencyMismatch",
    InternalInvariantViolation.exit_code: "InternalInvariantViolation",
}
