"""Exception types shared across the package."""


class FragilityError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FragilityError, ValueError):
    """An input violated a documented precondition."""


class NumericalError(FragilityError, RuntimeError):
    """A computation produced results outside its guaranteed tolerances."""


class InfiniteDiscontinuityError(FragilityError):
    """A zero-probability outcome has a nonvanishing first derivative,
    so the Fisher information diverges rather than jumping by a finite
    amount."""


class CutoffError(ValidationError):
    """A truncated-basis computation left too much weight near the cutoff."""

    def __init__(self, msg, suggested_cutoff=None):
        super().__init__(msg)
        self.suggested_cutoff = suggested_cutoff


class ConfigError(FragilityError, ValueError):
    """A CLI configuration file failed schema validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
