"""Exception hierarchy.

Every error raised by the library derives from :class:`HardyLabError`; the CLI
maps that base class to exit code 1.
"""

from __future__ import annotations


class HardyLabError(Exception):
    """Base class for all library errors."""


# geometry
class PointOutsideDomain(HardyLabError):
    pass


class AmbiguousNearest(HardyLabError):
    pass


# coefficients
class NonpositiveDensity(HardyLabError):
    pass


class NotPositiveDefinite(HardyLabError):
    pass


class DegenerateTangentBlock(HardyLabError):
    pass


class ModelConstructionError(HardyLabError):
    """Model fails a construction-time check (seam, layer width, positivity)."""


# barriers / vector fields
class OutOfDomain(HardyLabError):
    pass


class OutOfLayer(HardyLabError):
    pass


class StepUnderflow(HardyLabError):
    pass


# criteria
class UnknownKind(HardyLabError):
    pass


class IncompatibleModel(HardyLabError):
    pass


# quadrature
class SingularQuadraturePoint(HardyLabError):
    pass


class SupportViolation(HardyLabError):
    pass


class GridTooLarge(HardyLabError):
    pass


# 1-D oracle
class StiffnessFailure(HardyLabError):
    pass


class NotReducible(HardyLabError):
    pass


# configuration
class ParseError(HardyLabError):
    def __init__(self, line: int | None, message: str):
        self.line = line
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class ValidationError(HardyLabError):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class ConfigError(HardyLabError):
    """Aggregates every parse/validation problem found in one configuration."""

    def __init__(self, errors: list[HardyLabError]):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors))
