"""Exception hierarchy.

Every error raised by the library derives from :class:`FxcError`. Errors that
describe a bad argument also derive from :class:`ValueError` so callers that
only care about "invalid input" can catch that.
"""


class FxcError(Exception):
    """Base class for all library errors."""


class ConfigError(FxcError, ValueError):
    """Invalid construction arguments or scenario configuration."""


# topology
class NonSquare(ConfigError):
    pass


class NegativeWeight(ConfigError):
    pass


class NonzeroDiagonal(ConfigError):
    pass


class ZeroCoupling(ConfigError):
    pass


class IsolatedNetwork(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


# observer
class EmptyGains(ConfigError):
    pass


class NotHurwitz(ConfigError):
    pass


class IllConditioned(FxcError):
    pass


# controller / plant / engine
class NonFiniteState(FxcError):
    pass


class NonFiniteResult(FxcError):
    pass


class StageOrderViolation(FxcError):
    pass


class ConfigInvalid(ConfigError):
    pass


class Divergence(FxcError):
    """A simulated state left the admissible range.

    Attributes
    ----------
    time : float
        Grid time of the step at which divergence was detected.
    agent : int
        Zero-based follower index.
    """

    def __init__(self, message: str, time: float, agent: int):
        super().__init__(message)
        self.time = time
        self.agent = agent


# fixed-time bound
class ConditionViolated(ConfigError):
    pass


class StepTooCoarse(FxcError):
    pass


# metrics
class EmptyTrace(FxcError):
    pass


class EmptyTail(FxcError):
    pass


# scenario files
class ParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass
