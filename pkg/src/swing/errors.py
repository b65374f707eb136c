"""Exception types shared across the package."""


class SwingError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(SwingError, ValueError):
    """Malformed or inconsistent caller input (shapes, ranges, dimensions)."""


class InvalidKernelError(SwingError, ValueError):
    """Kernel coefficient sequence unusable (e.g. nonpositive leading term)."""


class ConvergenceError(SwingError):
    """Truncated kernel series did not converge at the requested order."""

    def __init__(self, message: str, tail_magnitude: float):
        super().__init__(message)
        self.tail_magnitude = tail_magnitude


class EmptySupportError(SwingError):
    """A categorical or softmax step found no positive-weight support."""


class DegenerateTransitionError(SwingError):
    """Linearized walk transition hit a vanishing denominator."""

    def __init__(self, message: str, step: int | None = None, magnitude: float | None = None):
        super().__init__(message)
        self.step = step
        self.magnitude = magnitude


class MeshParseError(SwingError):
    """Mesh file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line_number: int | None = None):
        super().__init__(message)
        self.line_number = line_number
