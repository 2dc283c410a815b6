"""Exception hierarchy shared by every module."""


class LoccQecError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(LoccQecError, ValueError):
    pass


class NotHermitian(LoccQecError, ValueError):
    pass


class NotNormalized(LoccQecError, ValueError):
    pass


class NotRankOne(LoccQecError, ValueError):
    pass


class NotDistinguishable(LoccQecError):
    """Bob's conditional states fail to be mutually orthogonal.

    ``pair`` holds ``(x, i, k)``: the Alice outcome and the two offending
    state labels; ``overlap`` is the size of their inner product.
    """

    def __init__(self, message, pair=None, overlap=None):
        super().__init__(message)
        self.pair = pair
        self.overlap = overlap


class NotMaximallyEntangled(LoccQecError, ValueError):
    pass


class NotCommuting(LoccQecError, ValueError):
    pass


class NotNormal(LoccQecError, ValueError):
    pass


class NotClosed(LoccQecError, ValueError):
    pass


class NonIntegerStructure(LoccQecError, ValueError):
    pass


class NotSquareBlocks(LoccQecError, ValueError):
    pass


class NoConvergence(LoccQecError, RuntimeError):
    pass


class StrictSubspaceRequired(LoccQecError, ValueError):
    pass


class CommutationFailure(LoccQecError, RuntimeError):
    pass


class RankOneRequired(LoccQecError, ValueError):
    pass


class QubitCountMismatch(LoccQecError, ValueError):
    pass


class InvalidParams(LoccQecError, ValueError):
    pass


class InconsistentVerdict(LoccQecError, RuntimeError):
    pass


class ParseError(LoccQecError, ValueError):
    pass
