"""Exception types shared across the package.

Every error raised on purpose derives from VidsumError so callers (and the
CLI) can distinguish our failures from genuine bugs. The CLI maps
UsageError/ConfigError to exit code 1 and the data/numeric family to 2.
"""


class VidsumError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(VidsumError):
    """Bad command-line invocation: unknown flag, missing argument."""


class ConfigError(VidsumError):
    """Config file problem: unknown key, wrong value type, bad choice."""


class ShapeError(VidsumError):
    """Array has the wrong rank, length, or incompatible dimensions."""


class DomainError(VidsumError):
    """Value outside the mathematical domain (negative probability, ...)."""


class DegenerateInputError(VidsumError):
    """Input is technically valid but the quantity is undefined on it
    (zero-variance sequence for a correlation, empty selection, ...)."""


class DataError(VidsumError):
    """Dataset content violates an invariant (picks not ascending,
    non-finite feature, annotation length mismatch, ...)."""


class ParseError(VidsumError):
    """Binary container is malformed; message includes the byte offset."""


class NumericError(VidsumError):
    """Training produced a non-finite quantity; message says where."""


class StateError(VidsumError):
    """Operation called out of order (backward without a forward cache)."""
