"""Exception hierarchy shared by all modules."""


class GptConeError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GptConeError, ValueError):
    """A parameter or input lies outside the documented domain."""


class ZeroVector(DomainError):
    pass


class DimensionMismatch(GptConeError, ValueError):
    pass


class Lineality(GptConeError):
    """The cone has a nontrivial lineality space (or is not full-dimensional
    when its dual is requested)."""


class SingularMatrix(GptConeError, ValueError):
    pass


class ZeroProbability(GptConeError):
    """Conditioning on an outcome that never occurs."""


class NotAMeasurement(GptConeError, ValueError):
    """Effects do not sum to the unit measure."""


class DegenerateUnit(DomainError):
    pass


class EmbeddingInvalid(GptConeError):
    pass


class InvalidSymmetry(GptConeError):
    pass
