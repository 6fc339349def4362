class EcgFieldError(Exception):
    """Base class for all package errors."""


class DomainError(EcgFieldError, ValueError):
    """Input outside the domain an operation accepts."""


class UnsupportedError(EcgFieldError, NotImplementedError):
    """Recognized but deliberately unimplemented option."""


class ConstructionError(EcgFieldError, RuntimeError):
    """An internal consistency check failed while building an object."""


class DegenerateBasisError(EcgFieldError, ArithmeticError):
    """The overlap matrix has no numerically usable subspace."""
