"""Exception and warning types shared across the package."""


class DnmError(Exception):
    """Base class for all package errors."""


class ScheduleDomainError(DnmError):
    """Time outside the declared domain of a schedule."""


class PresetDomainError(DnmError):
    """Preset parameters leave the region where its closed forms hold."""


class SingularConfigurationError(PresetDomainError):
    """A denominator in a closed-form equilibrium or derivative vanished."""


class ZeroFrequencyError(DnmError):
    """Displaced-oscillator centers requested while some squared frequency is zero."""


class DivergenceError(DnmError):
    """Integration blew past the overflow guard.

    Carries the last valid partial trajectory in ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigError(DnmError):
    """Malformed run configuration."""


class FormulaDiscrepancyWarning(UserWarning):
    """Closed-form equilibrium disagrees with the authoritative root solve."""
