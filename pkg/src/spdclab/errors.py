"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 2, InfeasibleError -> 4,
everything else derived from SpdclabError (and plain ValueError from
precondition checks) -> 3.
"""


class SpdclabError(Exception):
    """Base class for all toolkit errors."""


class WavelengthRangeError(SpdclabError, ValueError):
    """Wavelength outside the validity range of a dispersion data set."""


class FitError(SpdclabError):
    """A least-squares fit could not be performed or did not converge."""


class RootNotFoundError(SpdclabError):
    """A bracketing root search found no sign change in the given interval."""


class ResolutionError(SpdclabError):
    """Input sampling too coarse for the requested analysis."""


class TailMassError(SpdclabError):
    """Enumeration cutoff leaves more probability mass in the tail than allowed."""


class InsufficientStatisticsError(SpdclabError):
    """Correlation estimator denominator is zero; carries the raw tallies."""

    def __init__(self, message, counts=None):
        super().__init__(message)
        self.counts = counts


class InfeasibleError(SpdclabError):
    """Optimization target outside the achievable range."""

    def __init__(self, message, achievable=None):
        super().__init__(message)
        self.achievable = achievable


class ConfigError(SpdclabError):
    """Configuration file is missing, unparsable, or violates invariants.

    ``violations`` lists every problem found, not just the first.
    """

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations) if violations else []

    def __str__(self):
        base = super().__str__()
        if self.violations:
            return base + "\n  - " + "\n  - ".join(self.violations)
        return base
