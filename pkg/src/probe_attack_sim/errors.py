"""Exception types shared across the package."""


class NotCoprimeError(ValueError):
    """Raised when a base shares a factor with the modulus."""


class ResourceLimitError(ValueError):
    """Raised when an exact enumeration would exceed desk-scale limits."""


class FactorizationFailure(Exception):
    """A period was found but does not yield a nontrivial factor.

    ``reason`` is either ``"odd-period"`` or ``"trivial-root"``.
    """

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason
