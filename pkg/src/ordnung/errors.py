"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`OrdnungError`.
Errors that signal a bad argument also derive from :class:`ValueError` so
callers that do not care about the finer classes can catch the usual type.
"""


class OrdnungError(Exception):
    """Base class for all library errors."""


class InvalidInput(OrdnungError, ValueError):
    pass


class NotStrictlyOrdered(InvalidInput):
    pass


class SizeMismatch(InvalidInput):
    pass


class IndexOutOfRange(InvalidInput, IndexError):
    pass


class NegativeRadius(InvalidInput):
    pass


class BadThresholds(InvalidInput):
    pass


class BadIndices(InvalidInput):
    pass


class BadSize(InvalidInput):
    pass


class EmptyFamily(InvalidInput):
    pass


class ToleranceNonPositive(InvalidInput):
    pass


class InvalidWitness(InvalidInput):
    pass


class NotMonotone(InvalidInput):
    """A member that should be increasing is not.

    ``member`` is the offending family index and ``points`` the adjacent pair
    of chain points where the value drops.
    """

    def __init__(self, message, member=None, points=None):
        super().__init__(message)
        self.member = member
        self.points = points


class NotIncreasing(NotMonotone):
    pass


class NotBVr(InvalidInput):
    pass


class TargetMismatch(InvalidInput):
    pass


class NotSeparating(InvalidInput):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class NotFragmented(InvalidInput):
    pass


class GroundTooLarge(InvalidInput):
    pass


class GridTooCoarse(InvalidInput):
    pass


class TooLarge(InvalidInput):
    pass


class BudgetExhausted(OrdnungError):
    """The stream selector ran out of draws; ``stage`` is the stage reached."""

    def __init__(self, message, stage):
        super().__init__(message)
        self.stage = stage


class ParseError(OrdnungError):
    def __init__(self, message, line=None, position=None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", position {position})" if position is not None else ")")
        super().__init__(message + where)
        self.line = line
        self.position = position


class SchemaError(OrdnungError):
    pass
