"""Exception hierarchy shared across the package.

Every failure mode that the command line surfaces as a distinct exit code
has its own exception type here; library code raises these rather than
bare ``ValueError`` so callers can map them to behaviour.
"""

from __future__ import annotations


class ChainTomoError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ChainTomoError):
    """Invalid or inconsistent run configuration (CLI exit code 2)."""


class ConvergenceError(ChainTomoError):
    """A numerical procedure failed to converge (CLI exit code 3).

    Carries the best achieved accuracy so callers can report it.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class KrylovError(ConvergenceError):
    """Local Krylov exponential did not converge within the allowed subspace."""


class GridConvergenceError(ConvergenceError):
    """Phase-space grid too coarse or too small for the reconstructed state."""


class TruncationError(ConvergenceError):
    """State truncation invalidates a requested measurement."""


class NullBranchError(ChainTomoError):
    """Postselection onto a branch with (numerically) zero probability."""


class DegenerateOrbitalError(ChainTomoError):
    """Leading natural orbital undefined (one-body matrix has no weight)."""


class ResourceLimitError(ChainTomoError):
    """Estimated resource use exceeds the configured ceiling (CLI exit code 4)."""
