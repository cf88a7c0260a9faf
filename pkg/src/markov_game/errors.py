"""Exception hierarchy.

Every domain failure derives from :class:`GameError`, itself a ``ValueError``,
so callers that only care about "bad input" can catch the builtin.
"""


class GameError(ValueError):
    """Base class for all domain errors raised by this package."""


class NonSquareError(GameError):
    pass


class NegativeRateError(GameError):
    def __init__(self, x, y, value):
        self.x, self.y, self.value = x, y, value
        super().__init__(f"negative off-diagonal rate L({x},{y}) = {float(value)!r}")


class RowSumError(GameError):
    def __init__(self, x, value):
        self.x, self.value = x, value
        super().__init__(f"row {x} sums to {float(value)!r}, expected 0")


class InvalidDistributionError(GameError):
    pass


class DimensionMismatchError(GameError):
    pass


class DimensionTooLargeError(GameError):
    pass


class DegenerateFamilyError(GameError):
    pass


class UnsupportedSpecError(GameError):
    pass


class NegativeArgumentError(GameError):
    pass


class InfiniteDivergenceError(GameError):
    pass


class ToleranceNotReachedError(GameError):
    def __init__(self, max_iter, width):
        self.max_iter, self.width = max_iter, width
        super().__init__(
            f"bisection did not reach tolerance in {max_iter} iterations (width {width:g})"
        )


class EmptyInputError(GameError):
    pass


class NonFiniteIterateError(GameError):
    pass


class NotConvergedError(GameError):
    pass


class ClassViolationError(GameError):
    def __init__(self, index, reason=""):
        self.index = index
        msg = f"member {index} is not of the form P - I with zero-diagonal P"
        super().__init__(f"{msg}: {reason}" if reason else msg)


class TooManyMembersError(GameError):
    pass


class ParseError(GameError):
    """Malformed instance document; ``path`` locates the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class InvalidWeightsError(GameError):
    pass
