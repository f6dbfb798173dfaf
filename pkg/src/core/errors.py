"""Error hierarchy for hsfl.

Every error carries the CLI exit code it maps to, so commands only need to
catch ``HsflError`` and forward ``exit_code`` to ``typer.Exit``.
"""

from __future__ import annotations

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ENDPOINT = 2
EXIT_INCONCLUSIVE = 3
EXIT_NUMERICAL = 4


class HsflError(Exception):
    """Base class for all hsfl errors."""

    exit_code: int = EXIT_NUMERICAL
    title: str = "Error"


class InputError(HsflError):
    """Invalid user input: matrices, ranges, grids, config schema."""

    exit_code = EXIT_INPUT
    title = "Input Error"


class DimensionError(InputError):
    """Matrix dimensions do not agree."""


class SymmetryError(InputError):
    """A matrix that must be symmetric is not."""


class EndpointError(HsflError):
    """The path is singular at lambda = 0 or lambda = 1."""

    exit_code = EXIT_ENDPOINT
    title = "Endpoint Assumption Violated"


class NumericalError(HsflError):
    """A numerical procedure failed to produce a trustworthy answer."""

    exit_code = EXIT_NUMERICAL
    title = "Numerical Failure"


class ConvergenceError(NumericalError):
    """An iteration hit its cap before converging."""

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(f"{message} (off-diagonal residual {residual:.3e})")
        self.residual = residual


class ClusterError(NumericalError):
    """Crossings could not be separated at the current resolution."""


class RetriesExhaustedError(NumericalError):
    """No admissible shift produced regular crossings."""


class InternalConsistencyError(NumericalError):
    """Two independent characterizations of the same quantity disagree."""

    title = "Internal Consistency Error"
