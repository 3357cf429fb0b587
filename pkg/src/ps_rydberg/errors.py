class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class ConvergenceError(RuntimeError):
    """A numerical integration failed or violated its tolerance."""
