"""Exception types shared across the package."""


class SpikeCodingError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(SpikeCodingError, ValueError):
    """An argument is outside its documented range."""


class DegenerateInputError(SpikeCodingError):
    """Input is structurally valid but carries no usable signal."""


class DataError(SpikeCodingError):
    """Not enough data to carry out an estimation."""
