"""Arithmetic-level simulation of Simon's and Shor's algorithms, the
entangling-probe attack on both, and the statistics of Shor's miss event."""

from .errors import FactorizationFailure, NotCoprimeError, ResourceLimitError

__version__ = "0.1.0"

__all__ = ["FactorizationFailure", "NotCoprimeError", "ResourceLimitError", "__version__"]
