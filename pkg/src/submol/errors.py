"""Error types shared across training and configuration."""


class ConfigError(ValueError):
    """An invalid option or option combination."""


class TrainingError(RuntimeError):
    """Training could not produce a model (divergence, bad inputs, ...)."""
