"""Exception types shared across the package."""


class ResolutionError(ValueError):
    """Spectral resolution is insufficient (aliasing or blocking detected)."""


class DivergenceError(RuntimeError):
    """A time integration produced non-finite values."""


class WindowError(ValueError):
    """Requested probe times fall outside the resolvable scaling window."""


class OracleError(RuntimeError):
    """An exact-solution oracle failed its own validity checks."""


class ConfigError(ValueError):
    """A run configuration failed strict validation."""
