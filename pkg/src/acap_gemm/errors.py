"""Error types shared across the package."""


class CapacityError(Exception):
    """A memory level cannot hold the data assigned to it.

    ``levels`` names every level that overflowed; ``report`` carries the
    full footprint breakdown when one was computed before the failure.
    """

    def __init__(self, levels, report=None):
        if isinstance(levels, str):
            levels = [levels]
        self.levels = list(levels)
        self.report = report
        super().__init__(f"capacity exceeded at: {', '.join(self.levels)}")


class ConfigError(Exception):
    """Malformed run configuration (bad JSON, unknown key, bad value)."""
