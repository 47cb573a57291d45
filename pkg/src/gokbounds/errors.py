"""Exception hierarchy.

Two families matter to callers: ValidationError for malformed or
out-of-contract inputs (the CLI maps these to exit code 2), and RegimeError
for inputs that are well-formed but outside the numerical regime a result is
guaranteed in (exit code 3).
"""


class GokBoundsError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GokBoundsError):
    """Input fails a structural precondition."""


class DimensionMismatchError(ValidationError):
    """Vectors or matrices with incompatible dimensions."""


class ShapeError(ValidationError):
    """Weight vector is not in a shape the requested formula covers."""


class DegenerateWeightError(ValidationError):
    """A bound was requested at an index where equal weights make it meaningless."""


class DegenerateSpectrumError(ValidationError):
    """Energy levels closer than the non-degeneracy tolerance."""


class NonUnitaryError(ValidationError):
    """Matrix fails the unitarity check."""


class ParameterCountError(ValidationError):
    """Ansatz parameter vector has the wrong length."""


class RangeError(ValidationError):
    """Scalar argument outside its admissible range."""


class RegimeError(GokBoundsError):
    """Valid input, but outside the guaranteed numerical regime."""


class OutOfRegimeError(RegimeError):
    """Requested slice or check lies beyond the validity threshold g."""


class ConvergenceError(RegimeError):
    """Iterative optimization failed to make progress."""
