"""Exception hierarchy shared by every hecke_pm module.

Library code raises these; only the command-line driver turns them into exit codes.
"""

from __future__ import annotations

from typing import Optional


class HeckePmError(Exception):
    """Base class for all hecke_pm failures."""

    exit_code = 2


class PrecisionError(HeckePmError):
    """Ring or precision mismatch, or a truncation too short for the requested operation."""


class NotAUnitError(HeckePmError):
    """An element that must be invertible is divisible by the uniformizer."""


class IncomparableRingsError(HeckePmError):
    """Two elements live in rings without a declared common overring."""


class ParseError(HeckePmError):
    """Malformed basis, catalog or ring text."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(f"{message}{where}")


class BasisError(HeckePmError):
    """Rank deficiency, failed saturation or a non-integral Hecke matrix."""


class NotInSpanError(HeckePmError):
    """Requested coefficients are not realized by any form of the space."""

    exit_code = 1


class CongruenceError(HeckePmError):
    """A coefficientwise congruence fails; ``index`` is the first offending coefficient."""

    exit_code = 1

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        super().__init__(message if index is None else f"{message} (first failure at n={index})")


class PreconditionError(HeckePmError):
    """Inputs violate the hypotheses of an operation."""


class ConsistencyError(HeckePmError):
    """An internal cross-check disagreed."""

    exit_code = 1
