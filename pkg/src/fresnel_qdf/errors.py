"""Exception types shared across the package.

Parameter problems subclass ``ValueError``; numerical breakdowns subclass
``ArithmeticError`` so the CLI can map them to different exit codes.
"""


class ParameterError(ValueError):
    """An argument is outside the domain an operation supports."""


class DimensionError(ParameterError):
    """A Fock index does not fit in the truncated basis."""


class DegenerateStateError(ParameterError):
    """A superposition has (numerically) zero norm."""


class OrderError(ParameterError):
    """Fractional Fourier order too close to a multiple of pi."""


class UnsupportedParameterError(ParameterError):
    """The series for this ordering parameter does not converge."""


class SingularParameterError(ParameterError):
    """The ordering parameter makes the prefactor singular."""


class TruncationError(ArithmeticError):
    """The truncated Fock basis is too small for the requested accuracy."""
