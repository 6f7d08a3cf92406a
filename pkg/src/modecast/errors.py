"""Exception types raised across the modecast library."""


class ModecastError(Exception):
    """Base class for all modecast errors."""


class EmptyInputError(ModecastError):
    """An operation received an empty sequence."""


class TooShortError(ModecastError):
    """A sequence is shorter than the operation requires."""


class TooFewRowsError(ModecastError):
    """A dataset has too few rows to be split into train/test partitions."""


class ConstantSeriesError(ModecastError):
    """A series has zero variance where non-zero variance is required."""


class NonFiniteError(ModecastError):
    """A value or iterate became NaN or infinite."""


class DimensionMismatchError(ModecastError):
    """Array shapes are inconsistent with the configured dimensions."""


class KernelEvenError(ModecastError):
    """A moving-average kernel width must be odd."""


class KernelTooLargeError(ModecastError):
    """A moving-average kernel is wider than the window it is applied to."""


class EmptyBatchError(ModecastError):
    """A loss or gradient was requested for an empty batch."""


class NonFiniteLossError(ModecastError):
    """Training diverged: the loss or a parameter became non-finite."""


class LengthMismatchError(ModecastError):
    """Two sequences that must have equal length do not."""


class ContextTooShortError(ModecastError):
    """The recent context passed to predict is too short for the fitted model."""
