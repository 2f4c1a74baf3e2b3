"""Exception hierarchy for pdqshape."""


class PdqError(Exception):
    """Base class for all errors raised by this package."""


class UnknownFamily(PdqError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NonSquareIntegrable(PdqError, ValueError):
    """The density is not square integrable, so no pdQ exists."""


class QuadratureFailure(PdqError, ArithmeticError):
    pass


class GridMismatch(PdqError, ValueError):
    pass


class NonPositiveQuantileDensity(PdqError, ArithmeticError):
    """Kernel quantile-density estimate is not positive at some grid points."""

    def __init__(self, message, u=None):
        super().__init__(message)
        self.u = u


class DegenerateProjection(PdqError, ArithmeticError):
    pass


class FixedPointDivergence(PdqError, ArithmeticError):
    def __init__(self, message, u=None):
        super().__init__(message)
        self.u = u


class NoInteriorMinimum(PdqError, ArithmeticError):
    pass


class InconclusiveLimit(PdqError, ArithmeticError):
    def __init__(self, message, order=None, values=None):
        super().__init__(message)
        self.order = order
        self.values = values


class EmptyFeasibleGrid(PdqError, ValueError):
    pass


class NonPositiveData(PdqError, ValueError):
    pass


class NonConvergence(PdqError, ArithmeticError):
    pass


class DegenerateRegressor(PdqError, ValueError):
    pass
