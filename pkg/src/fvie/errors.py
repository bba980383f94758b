"""Exception hierarchy shared by the solver modules and the CLI."""


class FVIEError(Exception):
    """Base class for every error raised by this package."""


class GridMismatchError(FVIEError, ValueError):
    """Operands live on different level grids or sample grids."""


class DomainError(FVIEError, ValueError):
    """An argument is outside the admissible domain (negative bound input, ...)."""


class UnsupportedDomainError(DomainError):
    """The problem domain is not a square."""


class NumericFailureError(FVIEError, ArithmeticError):
    """An inner numerical procedure (root refinement, ...) failed to converge."""


class BreakpointOrderError(FVIEError, ValueError):
    """Breakpoint curves are out of order or violate their endpoint conditions."""


class PositivityViolationError(FVIEError, ValueError):
    """A kernel sample was not strictly positive."""


class FuzzyValidityError(FVIEError, ValueError):
    """A computed fuzzy value has crossed or non-nested cuts."""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class SingularSystemError(FVIEError, ArithmeticError):
    """The collocation matrix has a pivot below the configured tolerance."""


class AssemblyError(FVIEError, ArithmeticError):
    """A non-finite coefficient appeared while assembling the linear system."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NonConvergenceError(FVIEError, ArithmeticError):
    """A fixed-point or Picard iteration hit its cap without meeting tolerance."""

    def __init__(self, message, ratio=None, iterations=None):
        super().__init__(message)
        self.ratio = ratio
        self.iterations = iterations


class ProblemNotFoundError(FVIEError, KeyError):
    """Requested registry name is not registered."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""
