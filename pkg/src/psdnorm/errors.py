"""Exception hierarchy shared by all psdnorm modules."""


class PsdNormError(Exception):
    """Base class for all library errors."""


class ShapeMismatchError(PsdNormError):
    """Operands have incompatible channel or frequency dimensions."""


class ChannelMismatchError(ShapeMismatchError):
    """Signal and filter bank disagree on channel count."""


class LengthTooShortError(PsdNormError):
    """Signal is shorter than the analysis window."""


class FilterLongerThanSignalError(PsdNormError):
    """Filter has more taps than the signal has samples."""


class NonFiniteInputError(PsdNormError):
    """Input contains NaN or Inf."""


class EmptyInputError(PsdNormError):
    """A non-empty collection was required."""


class ParameterOutOfRangeError(PsdNormError):
    """Scalar parameter outside its documented range."""


class ImagLeakageError(PsdNormError):
    """Imaginary residual of a synthesized filter exceeds tolerance,
    typically because an input PSD is not conjugate-symmetric."""


class TooLargeForDenseError(PsdNormError):
    """Dense O(l^3) verification path refused for long signals."""


class NonPositivePsdError(PsdNormError):
    """PSD entries must be strictly positive."""


class EvalWithoutBarycenterError(PsdNormError):
    """Eval-mode forward requested before any barycenter was accumulated."""


class EvalWithoutStatsError(PsdNormError):
    """Eval-mode forward requested before running statistics exist."""
