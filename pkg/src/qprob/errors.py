"""Exception types shared by the q-probability modules."""


class DomainError(ValueError):
    """Raised when parameters fall outside an operation's domain."""


class ResourceError(RuntimeError):
    """Raised when a brute-force computation would exceed its size guard."""


class IdentityViolation(AssertionError):
    """Raised when a built-in cross-check between two exact routes fails."""
