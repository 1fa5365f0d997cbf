"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ConfigError -> 2, NumericError and
subclasses -> 3, MissingDependencyError -> 4.
"""


class ScarbenchError(Exception):
    """Base class for all package errors."""


class DomainError(ScarbenchError):
    """Coordinate outside the declared surface domain."""


class PathError(ScarbenchError):
    """Minimum-energy-path construction failed at some angle."""


class CoefficientParseError(ScarbenchError):
    """Malformed coefficient file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericError(ScarbenchError):
    """Generic numerical failure (exit code 3)."""


class EscapeError(NumericError):
    """Trajectory left the domain / no section crossing in budget."""


class ForbiddenError(NumericError):
    """Energetically forbidden section point (imaginary momentum)."""


class ConvergenceError(NumericError):
    """Iteration failed to converge."""

    def __init__(self, message: str, residuals=None):
        self.residuals = list(residuals) if residuals is not None else []
        super().__init__(message)


class ContractError(NumericError):
    """An operation precondition was violated (e.g. point off-section)."""


class ResolutionError(NumericError):
    """Grid or time sampling cannot resolve the requested field/spectrum."""


class GridTooSmallError(NumericError):
    """Wave packet mass outside the grid exceeds tolerance."""


class WidthUndefinedError(NumericError):
    """Transverse width requested of a degenerate (all-floor) field."""


class DataError(NumericError):
    """Invalid data handed to an analysis routine."""


class PipelineError(NumericError):
    """End-to-end sweep could not produce enough samples."""


class ConfigError(ScarbenchError):
    """Invalid run configuration (exit code 2)."""


class MissingDependencyError(ScarbenchError):
    """A required upstream artifact is absent (exit code 4)."""
