"""Exception hierarchy shared by every ampforge module."""


class AmpforgeError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(AmpforgeError, ValueError):
    pass


class InvalidDim(AmpforgeError, ValueError):
    pass


class InvalidState(AmpforgeError, ValueError):
    pass


class TruncationTooSmall(AmpforgeError, ValueError):
    pass


class NegativeVariance(AmpforgeError, ArithmeticError):
    pass


class EmptySet(AmpforgeError, ValueError):
    pass


class InvalidProbability(AmpforgeError, ValueError):
    pass


class InvalidOverlap(AmpforgeError, ValueError):
    pass


class NTooLarge(AmpforgeError, ValueError):
    pass


class LinearlyDependentSet(AmpforgeError, ValueError):
    pass


class NotPSD(AmpforgeError, ValueError):
    pass


class ShapeMismatch(AmpforgeError, ValueError):
    pass


class ZeroGamma(AmpforgeError, ZeroDivisionError):
    pass


class ZeroInputSignal(AmpforgeError, ZeroDivisionError):
    pass


class GainInconsistent(AmpforgeError, ValueError):
    pass


class LengthMismatch(AmpforgeError, ValueError):
    pass


class TruncationBoundary(AmpforgeError, ValueError):
    pass


class SingularCovariance(AmpforgeError, ValueError):
    pass


class UndefinedPhase(AmpforgeError, ValueError):
    pass


class InvalidGain(AmpforgeError, ValueError):
    pass


class TargetAmplitudeMismatch(AmpforgeError, ValueError):
    pass


class DegenerateModel(AmpforgeError, ValueError):
    pass


class InvalidParameters(AmpforgeError, ValueError):
    pass


class DivergentSensitivity(AmpforgeError, ArithmeticError):
    pass


class ZeroSignal(AmpforgeError, ZeroDivisionError):
    pass


class InsufficientTrials(AmpforgeError, ValueError):
    pass


class NegativeTime(AmpforgeError, ValueError):
    pass


class UnsortedTimes(AmpforgeError, ValueError):
    pass


class TooFewPoints(AmpforgeError, ValueError):
    pass


class ThresholdUnreachable(AmpforgeError, ValueError):
    pass


class ParseError(AmpforgeError, ValueError):
    pass


class SchemaError(AmpforgeError, ValueError):
    """Problem-file validation failure.

    Attributes:
        path: Location of the offending field, e.g. ``probs[0]``.
    """

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class VersionUnsupported(AmpforgeError, ValueError):
    pass
