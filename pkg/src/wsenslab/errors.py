"""Exception types shared across the package."""


class DimensionMismatch(ValueError):
    """Vectors of different ambient dimensions were combined."""


class DegenerateSemigroup(ValueError):
    """The generator data cannot support the requested construction."""


class NotAMember(ValueError):
    """An element outside the acting semigroup was used as an orbit index."""


class PrecisionExhausted(RuntimeError):
    """An expanding map was iterated past its precision budget."""


class EmptyWindow(ValueError):
    """A truncation window contains no usable semigroup elements."""


class GenerationFailure(ValueError):
    """A claimed generating set fails to generate at the verification scale."""


class ConfigError(ValueError):
    """Malformed experiment configuration."""


class InconclusiveOutcome(RuntimeError):
    """A driver refused to emit a report because a verdict came back inconclusive."""
