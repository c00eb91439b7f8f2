"""Exception hierarchy shared across the pipeline."""


class MosegError(Exception):
    """Base class for all errors raised by this package."""

    category = "numerical"


class TrajectoryFormatError(MosegError):
    """Malformed trajectory text file (carries the offending line number)."""

    category = "io"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvariantViolation(MosegError):
    """A data-model invariant does not hold (names the offending point)."""

    category = "config"


class DegenerateSampleError(MosegError):
    """Minimal sample is in a degenerate configuration (e.g. collinear)."""


class NumericalFailureError(MosegError):
    """Linear algebra could not produce a usable result."""


class HypothesisExhaustionError(MosegError):
    """Rejection sampling could not reach the requested hypothesis budget."""


class IsolatedPointError(MosegError):
    """Affinity matrix has a zero-degree row; spectral step cannot proceed."""


class EvaluationError(MosegError):
    """Predicted and ground-truth labelings cannot be compared."""

    category = "config"
