"""Exception types shared across the package."""


class RssBreathError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(RssBreathError):
    """A parameter or configuration value is invalid."""


class EmptyFrameError(RssBreathError):
    """No link has enough samples to fill the requested window."""


class DataError(RssBreathError):
    """An input file or data array is malformed or inconsistent."""


class SingularModelError(RssBreathError):
    """The regularized imaging system could not be solved reliably."""
