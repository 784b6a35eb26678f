"""Exception hierarchy shared by all subpackages."""


class SlhError(Exception):
    """Base class for every error raised by slhrobust."""


class DimensionError(SlhError, ValueError):
    """Operand shapes are inconsistent."""


class ValidationError(SlhError, ValueError):
    """A value violates a structural invariant (unitarity, hermiticity, ...)."""


class DomainError(SlhError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class InvalidModelError(SlhError, ValueError):
    """An uncertain model cannot be analysed as given."""


class NumericalError(SlhError, ArithmeticError):
    """A numerical routine failed or produced an untrustworthy result."""


class ConsistencyError(NumericalError):
    """Two independent computations of the same quantity disagree.

    Signals an implementation defect, never a user error.
    """


class InfeasibleError(SlhError):
    """No certificate exists for the requested bound."""
