"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class DataFormatError(ValueError):
    """A dataset or model file failed validation."""


class TrainingDiverged(RuntimeError):
    """Parameters became non-finite during training."""
