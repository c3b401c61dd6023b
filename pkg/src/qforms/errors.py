"""Exception hierarchy shared by every qforms module."""


class QFormsError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class DomainError(QFormsError, ValueError):
    """A parameter lies outside the domain where the quantity is defined."""

    exit_code = 3


class PoleError(DomainError):
    """An exact zero was hit in a denominator."""


class DivergenceError(DomainError):
    """The requested series does not converge at the given parameters."""


class NoCertifiedConvergence(QFormsError):
    """A ratio bound < 1 could not be established within the term budget."""

    exit_code = 4


class NonInvertibleError(QFormsError, ZeroDivisionError):
    """Inversion of a power series with vanishing constant term."""

    exit_code = 3


class InsufficientTruncation(QFormsError):
    """A truncated series does not carry enough coefficients for the check."""

    exit_code = 3


class IndexUnderflow(QFormsError, IndexError):
    exit_code = 3


class PrecisionExhausted(QFormsError):
    """Retries with increased working precision did not reach the target."""

    exit_code = 4
