"""
Exception types raised by qmem.

Every error derives from `QmemError` and from the builtin a caller would
naturally expect, so ``except ValueError`` keeps working for shape and range
problems.
"""


class QmemError(Exception):
    """Base class of every error raised by this package."""


class DimensionError(QmemError, ValueError):
    """Matrix or vector shapes do not line up."""


class DomainError(QmemError, ValueError):
    """A parameter lies outside the range the formula is defined on."""


class ConfigError(QmemError, ValueError):
    """A configuration record is malformed or carries unknown keys."""


class CapacityError(QmemError, OverflowError):
    """An instance is too large for the packed representation or for enumeration."""


class InfeasibleError(QmemError, ArithmeticError):
    """The requested computation has no feasible point."""
