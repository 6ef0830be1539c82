"""Exception types shared across the toolkit.

Validation problems found while loading a dataset are collected as
individual exception instances and raised together inside a single
DatasetValidationError, so callers see the full defect list instead of
the first row that happened to break.
"""


class ChainscopeError(Exception):
    """Base class for all toolkit errors."""


# -- dataset / ingestion ------------------------------------------------

class SchemaError(ChainscopeError):
    """Malformed file: wrong columns, bad types, out-of-range values."""


class DuplicateId(ChainscopeError):
    """An id (city, firm, or owner/owned link pair) appears twice."""


class DanglingReference(ChainscopeError):
    """A referenced id does not resolve to a loaded record."""


class UnknownCountry(ChainscopeError):
    """Country code absent from the region taxonomy."""


class UnknownSectorLabel(ChainscopeError):
    """Raw activity label absent from the sector mapping."""


class ZeroTurnover(ChainscopeError):
    """FORCE is undefined: positive participation in a zero-turnover firm."""


class InvalidSize(ChainscopeError):
    """Fixture size request cannot be satisfied."""


class DatasetValidationError(ChainscopeError):
    """Aggregate of every violation found while loading a dataset."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = [f"  - {type(v).__name__}: {v}" for v in self.violations]
        super().__init__(
            "dataset failed validation with %d violation(s):\n%s"
            % (len(self.violations), "\n".join(lines))
        )

    def of_type(self, exc_type):
        return [v for v in self.violations if isinstance(v, exc_type)]


# -- chains --------------------------------------------------------------

class MissingTerminal(ChainscopeError):
    """Chain has no terminal level, so its orientation is undefined."""


class EmptyInput(ChainscopeError):
    """Operation needs at least one observation."""


# -- graphs / metrics ----------------------------------------------------

class UnsupportedFormat(ChainscopeError):
    """Graph serialization format is not one of graphml/dot/edgelist."""


class GraphTooLarge(ChainscopeError):
    """Brute-force verifier refuses graphs above its size cap."""


# -- morphology ----------------------------------------------------------

class Disconnected(ChainscopeError):
    """Structure classification needs a connected graph."""


class TooSmall(ChainscopeError):
    """Structure classification needs at least two nodes."""


# -- correspondence analysis ----------------------------------------------

class AxisOutOfRange(ChainscopeError):
    """Requested more factorial axes than the result holds."""


# -- pipeline --------------------------------------------------------------

class StageFailure(ChainscopeError):
    """A pipeline stage failed; carries the stage name for attribution."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
