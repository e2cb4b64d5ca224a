"""Exception types shared across the package."""


class PairNetError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(PairNetError):
    """Invalid run configuration (CLI exit code 2)."""


class DataError(PairNetError):
    """Unusable input data (CLI exit code 3)."""


class DegenerateSearchError(PairNetError):
    """Every search candidate was degenerate (CLI exit code 4)."""
