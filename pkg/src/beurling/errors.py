"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """A mathematical precondition of an operation does not hold."""


class ConvergenceError(RuntimeError):
    """An iterative or refinement procedure did not reach its tolerance.

    ``partial`` carries whatever diagnostic object was built before giving up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ToleranceError(ConvergenceError):
    """A computed result misses its certified tolerance."""


class SeriesFormatError(ValueError):
    """Malformed coefficient file."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
