"""Exception hierarchy shared across the package.

Two base classes split every failure into "the run was configured wrong"
(ConfigError, CLI exit code 2) and "the data cannot support the request"
(DataError, CLI exit code 3). The service layer maps them to HTTP error
payloads with the same categories.
"""

from __future__ import annotations


class FxlabError(Exception):
    """Base class for all package errors."""


class ConfigError(FxlabError):
    """Invalid configuration, parameters or request."""


class DataError(FxlabError):
    """Input data cannot support the requested operation."""


class LineError(DataError):
    """Data error tied to a specific 1-based line of an input file."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


# -- timeseries ---------------------------------------------------------

class MalformedRow(LineError):
    pass


class NonMonotonicTimestamp(LineError):
    pass


class NonPositivePrice(LineError):
    pass


class SeriesTooShort(DataError):
    pass


class EmptySplit(DataError):
    pass


# -- indicators ---------------------------------------------------------

class WindowTooLong(DataError):
    pass


class BadWindowOrder(ConfigError):
    pass


class InsufficientHistory(DataError):
    pass


# -- bayes --------------------------------------------------------------

class EmptyInput(DataError):
    pass


class SingleClassData(DataError):
    pass


class DimensionMismatch(DataError):
    pass


# -- cv ------------------------------------------------------------------

class FoldTooSmall(DataError):
    pass


class SingleClassFold(DataError):
    pass


# -- backtest -------------------------------------------------------------

class MisalignedDecisions(DataError):
    pass


# -- tsne -----------------------------------------------------------------

class PerplexityTooLarge(ConfigError):
    pass


class LengthMismatch(DataError):
    pass


# -- ga --------------------------------------------------------------------

class DegenerateFitnessWarning(UserWarning):
    """All-zero fitness vector; selection falls back to uniform sampling."""
