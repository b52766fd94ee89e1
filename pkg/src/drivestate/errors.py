"""Exception types shared across the package."""


class DrivestateError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(DrivestateError):
    """Feature vector length does not match the model dimension."""


class EmptySequenceError(DrivestateError):
    """An observation sequence was empty where at least one frame is required."""


class StochasticityError(DrivestateError):
    """A matrix expected to be row-stochastic is not."""


class DuplicateMetastateError(DrivestateError):
    """Attempted to graft a metastate id that is already active."""


class UnknownMetastateError(DrivestateError):
    """Referenced a metastate id that is not in the configuration."""


class ProtectedMetastateError(DrivestateError):
    """Attempted to prune the default Continue metastate."""


class MissingModelError(DrivestateError):
    """The registry has no trained model for a required metastate id."""


class TimestampOrderError(DrivestateError):
    """Frame timestamps must strictly increase within a stream."""


class TimelineError(DrivestateError):
    """Context timeline is empty, unordered, or misaligned with the observations."""


class TemplateError(DrivestateError):
    """Invalid event template or event/context pairing in a route script."""


class ModelSchemaError(DrivestateError):
    """A serialized model file violates the model document schema."""


class DegenerateDataWarning(UserWarning):
    """Training data was degenerate (e.g. all frames identical); covariances clamped."""
