"""Exception types raised by the solvers and samplers."""


class DeteqError(Exception):
    """Base class for all errors raised by iterdeteq."""


class NotPositiveDefinite(DeteqError, ValueError):
    pass


class NotPSD(DeteqError, ValueError):
    pass


class NoRootInInterval(DeteqError, ArithmeticError):
    pass


class NonConvergence(DeteqError, ArithmeticError):
    """A fixed-point or outer iteration hit its iteration cap."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class InvalidConfig(DeteqError, ValueError):
    pass


class NotCodiagonalizable(DeteqError, ValueError):
    pass
