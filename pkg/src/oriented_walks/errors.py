"""Exception types raised by the simulation modules and the command line."""


class OrientedWalkError(Exception):
    """Base class for all package errors."""


class OutOfWindowError(OrientedWalkError, IndexError):
    """A pre-sampled environment was queried outside its window."""

    def __init__(self, level, lo, hi):
        super().__init__(
            f"level {level} outside pre-sampled window [{lo}, {hi}]; "
            "size the window to at least the walk length"
        )
        self.level = level
        self.lo = lo
        self.hi = hi


class MalformedFunctionError(OrientedWalkError, ValueError):
    """A function description is not in the supported monotone family."""


class NonpositiveCorrelationError(OrientedWalkError, ValueError):
    """A correlation estimate inside a power-law fit range was <= 0."""


class WindowTooLargeError(OrientedWalkError, ValueError):
    """Exact enumeration was requested on a window that is too wide."""


class UsageError(OrientedWalkError):
    """Bad command line or config file usage (unknown flag, bad syntax)."""


class ValidationError(OrientedWalkError, ValueError):
    """A configuration value is out of its allowed range."""


class InvariantViolation(OrientedWalkError):
    """An identity that must hold exactly was found to fail."""
