"""Exception hierarchy.

Input errors map to CLI exit code 2, metric errors to exit code 3.
"""


class DismetError(Exception):
    pass


class InputError(DismetError, ValueError):
    """Malformed or inconsistent input data."""


class MetricError(DismetError):
    """A metric cannot be computed on otherwise valid input."""


class RowMismatch(InputError):
    pass


class FactorOutOfRange(InputError):
    pass


class NonFiniteValue(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class LengthMismatch(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class GridTooLarge(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BadMagic(InputError):
    pass


class TruncatedFile(InputError):
    pass


class VersionUnsupported(InputError):
    pass


class IOFailure(DismetError, OSError):
    pass


class NotAGrid(MetricError):
    pass


class EmptySelection(MetricError):
    pass


class DegenerateFactor(MetricError):
    pass


class InsufficientSamples(MetricError):
    pass


class AllDimensionsPruned(MetricError):
    pass


class EstimatorFailure(MetricError):
    pass


class UnsupportedBase(MetricError):
    pass


class RankDeficientWarning(UserWarning):
    """PCA target exceeds the numerical rank; trailing components are zero."""
