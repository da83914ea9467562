"""Exception types shared across the package."""


class OrthohideError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDimensionError(OrthohideError, ValueError):
    """Local dimension below 2."""


class ResourceLimitError(OrthohideError, RuntimeError):
    """Requested object exceeds a configured size or enumeration budget."""


class PreconditionError(OrthohideError, ValueError):
    """Input violates a documented precondition (domain, hypothesis, ...)."""


class ShapeError(OrthohideError, ValueError):
    """Operands have incompatible (d, k) or vector lengths."""


class SolverError(OrthohideError, RuntimeError):
    """The LP solver reached a state that the builders guarantee cannot occur."""


def check_dim(d: int) -> int:
    if isinstance(d, bool) or int(d) != d:
        raise InvalidDimensionError(f"dimension must be an integer, got {d!r}")
    d = int(d)
    if d < 2:
        raise InvalidDimensionError(f"dimension must be >= 2, got {d}")
    return d
