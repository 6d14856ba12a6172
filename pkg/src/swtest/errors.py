"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameter or inconsistent inputs (dimensions, counts, ranges)."""


class DataFormatError(ValueError):
    """Malformed external data (IDX files, CSV point clouds)."""
