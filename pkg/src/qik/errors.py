"""Exception hierarchy.

Separate classes rather than bare ``ValueError`` so callers can tell a
malformed argument from a numerical assumption that failed mid-computation.
"""


class QikError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(QikError):
    """Matrix or dimension-vector shapes are inconsistent."""


class RankError(QikError):
    """A rank / injectivity / surjectivity requirement failed at tolerance."""


class ConvergenceError(QikError):
    """An iteration hit its cap without meeting its tolerance."""


class DecompositionError(QikError):
    """Eigenspace decomposition or orbit splitting is ill-posed at tolerance."""


class RegularityError(QikError):
    """A genericity condition on the moment levels does not hold."""


class FormError(QikError):
    """Input is not in the standard form an operation requires."""
