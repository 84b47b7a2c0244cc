"""Exception hierarchy shared by all fracmorse modules."""


class FracMorseError(Exception):
    """Base class for every error raised by this package."""


class PreconditionError(FracMorseError, ValueError):
    """An input violates a documented precondition."""


class AssemblyError(FracMorseError):
    """Stiffness assembly produced an unusable entry.

    Attributes
    ----------
    entry : tuple of int or None
        Index of the worst offending matrix entry.
    """

    def __init__(self, message, entry=None):
        super().__init__(message)
        self.entry = entry


class OracleError(FracMorseError):
    """The brute-force quadrature oracle failed or exceeded its budget."""


class SolverError(FracMorseError):
    """A linear-algebra or iterative solver failed.

    Attributes
    ----------
    diagnostics : dict
        Free-form solver state at the time of failure.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NonConvergenceError(SolverError):
    """Iteration budget exhausted before the stopping test was met."""

    def __init__(self, message, last_residual=None, diagnostics=None):
        super().__init__(message, diagnostics)
        self.last_residual = last_residual


class GeometryError(SolverError):
    """Mountain-pass geometry is absent or the path collapsed."""


class NumericalDomainError(FracMorseError, ArithmeticError):
    """A reaction evaluation returned non-finite values."""
