"""Exception hierarchy shared by all modules."""


class PolyReachError(Exception):
    """Base class for every error raised by polyreach."""


class InvalidInputError(PolyReachError, ValueError):
    pass


class InvalidConfigError(PolyReachError, ValueError):
    pass


class UnsupportedRegionError(PolyReachError, NotImplementedError):
    pass


class DegenerateRegionError(PolyReachError, RuntimeError):
    pass


class OutOfRangeError(PolyReachError, ValueError):
    pass


class NumericalFailureError(PolyReachError, ArithmeticError):
    """A least-squares solve lost rank.

    ``condition`` holds the ratio of extreme singular values of the
    (weighted, orthogonalized) design matrix, ``context`` a free-form
    description of where the failure happened.
    """

    def __init__(self, message, condition=float("inf"), context=None):
        super().__init__(message)
        self.condition = condition
        self.context = context
