"""Fisher-information fragility analysis for noisy spin and bosonic probes."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    CutoffError,
    FragilityError,
    InfiniteDiscontinuityError,
    NumericalError,
    ValidationError,
)

__all__ = [
    "ConfigError",
    "CutoffError",
    "FragilityError",
    "InfiniteDiscontinuityError",
    "NumericalError",
    "ValidationError",
    "__version__",
]
