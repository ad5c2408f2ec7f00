from __future__ import annotations


class MdIqpError(Exception):
    """Base class for errors raised by md_iqp."""


class DimensionMismatchError(MdIqpError, ValueError):
    """Operand shapes do not agree."""


class SingularMatrixError(MdIqpError, ValueError):
    """A GF(2) matrix that must be invertible is not."""


class GridError(MdIqpError, ValueError):
    """Invalid lattice geometry or path request."""


class StaircaseError(MdIqpError, ValueError):
    """Staircase parameters cannot be realized on the given layout.

    The message names the ladder step whose index window is empty.
    """


class ResourceLimitError(MdIqpError):
    """A dense simulation would exceed the configured register cap."""


class SpectrumError(MdIqpError):
    """Iterative eigensolver did not converge."""

    def __init__(self, message: str, iterations: int | None = None, converged: int | None = None):
        super().__init__(message)
        self.iterations = iterations
        self.converged = converged


class ConfigError(MdIqpError, ValueError):
    """Experiment configuration could not be parsed or names no known experiment."""
