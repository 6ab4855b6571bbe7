"""Exception types raised by the public API.

Every precondition violation maps to one of these so callers (and the CLI)
can tell configuration mistakes apart from route preconditions.
"""


class MatDerivError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(MatDerivError):
    """Operands do not have compatible shapes."""


class NotHermitian(MatDerivError):
    """A Hermitian matrix was required but ``||a - a^H||_F`` is too large."""


class NoConvergence(MatDerivError):
    """An iterative eigenvalue computation failed to converge."""


class DomainError(MatDerivError):
    """A scalar function was evaluated outside its domain."""


class NotTriangular(MatDerivError):
    """An upper triangular matrix was required."""


class InsufficientDerivatives(MatDerivError):
    """A confluent divided difference needs a higher derivative than the
    scalar function provides."""


class MissingJetTerm(MatDerivError):
    """A jet lookup hit a multi-index with no stored matrix."""


class OrderExceeded(MatDerivError):
    """Requested derivative order is above the supported maximum."""


class NotDag(MatDerivError):
    """The adjacency matrix is not strictly upper triangular."""


class EmptyIndex(MatDerivError):
    """A nonzero multi-index was required."""


class ComplexityRefusal(MatDerivError):
    """The requested computation exceeds the configured cost cap."""


class TooCloseToMu(MatDerivError):
    """An eigenvalue lies within the protection band around the chemical
    potential, so occupied/virtual classification is ill-defined."""


class DegenerateGroundState(MatDerivError):
    """Eigenvector perturbation needs a simple lowest eigenvalue."""


class NotReal(MatDerivError):
    """The regular complex step requires real input data."""


class ReferenceValidationFailed(MatDerivError):
    """An experiment's reference solution failed its independent check."""
