"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2, data
problems exit 3, numerical failures exit 4.
"""


class PitchCodecError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(PitchCodecError):
    """Invalid or inconsistent configuration (bad formants, bad ranges, ...)."""


class DataError(PitchCodecError):
    """Invalid input data (length mismatches, missing corpus files, ...)."""


class NumericalError(PitchCodecError):
    """Non-finite losses or other numerical breakdown during training."""


class CheckpointError(PitchCodecError):
    """Corrupt, truncated, or incompatible checkpoint files."""
