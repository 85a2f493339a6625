"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own
class so that the CLI can map them onto stable exit codes.
"""


class ChiralFieldError(Exception):
    """Base class for all package errors."""


class ConfigError(ChiralFieldError):
    """Invalid user-supplied configuration (CLI exit code 2)."""


class InvalidPole(ChiralFieldError):
    """Soliton configuration violates a pole/constant invariant."""


class DegeneratePair(ChiralFieldError):
    """Two-soliton closed form called with equal poles."""


class NonRealOutput(ChiralFieldError):
    """Determinant path produced entries with imaginary residue above tolerance."""


class NoCrest(ChiralFieldError):
    """A time slice contains no interior extremum to track."""


class DegenerateField(ChiralFieldError):
    """Diagonal (or numerically diagonal) field: the conserved-density
    hierarchy is undefined because the off-diagonal entry of the scaled
    coefficient matrix enters denominators (CLI exit code 3)."""


class ConstraintViolation(ChiralFieldError):
    """A barred-derivative unit constraint is violated beyond tolerance."""


class SingularLambda(ChiralFieldError):
    """Scalar reduction requested on a window where the field is too close
    to the identity (CLI exit code 4)."""


class SingularMatrix(ChiralFieldError):
    """Field matrix not invertible (determinant far from one)."""


class SpectralPole(ChiralFieldError):
    """Spectral parameter too close to +-1."""


class Overflow(ChiralFieldError):
    """Background profile overflows the exp range on the requested window."""


class TooFewPoints(ChiralFieldError):
    """Stencil requires at least three samples along the axis."""


class EvenPointCount(ChiralFieldError):
    """Composite Simpson quadrature requires an odd sample count."""


class NonMonotoneData(ChiralFieldError):
    """Monotone interpolation requested on non-monotone data."""


class UnknownComponent(ChiralFieldError):
    """Heatmap component name not recognized."""
