class ChandiscError(Exception):
    pass


class DomainError(ChandiscError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class SpectralDomainError(DomainError):
    """Raised when a scalar function is undefined at an eigenvalue."""


class PreconditionError(ChandiscError, ValueError):
    """Raised when an input violates a structural precondition (symmetry, positivity, support)."""


class ResourceError(ChandiscError, RuntimeError):
    """Raised when a computation would exceed the dense dimension limit."""


class InterchangeError(DomainError):
    pass
