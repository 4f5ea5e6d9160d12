"""Semantic exception hierarchy."""


class NceNoiseError(Exception):
    """Base class for all library errors."""


class ParameterDomainError(NceNoiseError, ValueError):
    """A model or noise parameter lies outside its admissible domain."""


class ConstructionError(NceNoiseError, ValueError):
    """Inconsistent inputs when building a grid, histogram or config."""


class DegeneracyError(NceNoiseError, ArithmeticError):
    """The weighted second moment collapsed; the noise has no overlap
    with the informative region of the data density."""


class NumericError(NceNoiseError, ArithmeticError):
    """A numeric breakdown (NaN/Inf integrand, non-positive variance,
    softmax underflow) that indicates the computation cannot proceed."""
