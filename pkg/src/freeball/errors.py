"""Exception types shared across the package."""

from __future__ import annotations


class FreeballError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(FreeballError):
    """Operands have incompatible tuple length or matrix size."""


class DomainError(FreeballError):
    """Input lies outside the domain of the requested operation.

    Examples: evaluating a Mobius map at a point where ``I - X a*`` is
    singular, normalizing a tuple whose CP map is reducible, requesting a
    geodesic through the zero tuple.
    """


class NotGenericError(DomainError):
    """The tuple does not generate the full matrix algebra."""


class NumericalFailureError(FreeballError):
    """A computation produced a result that fails its own certificate.

    Examples: a Perron eigenmatrix that is not positive definite within
    tolerance, a residual that exceeds its bound. Distinct from
    :class:`DomainError`: the input was acceptable, the numerics were not.
    """


class ConvergenceError(NumericalFailureError):
    """An iterative routine failed to converge within its budget."""


class ParseError(FreeballError, ValueError):
    """Text or document input could not be parsed.

    Parameters
    ----------
    message:
        Human-readable description of the problem.
    position:
        For text input, the 0-based character offset of the error; for
        JSON documents, a ``/``-separated path into the document. ``None``
        when no location is meaningful.
    """

    def __init__(self, message: str, position: int | str | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at {position})"
        super().__init__(message)
