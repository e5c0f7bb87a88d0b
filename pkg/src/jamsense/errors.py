"""Exception types shared across the package."""


class JamsenseError(Exception):
    """Base class for all package errors."""


class DomainError(JamsenseError, ValueError):
    """An input is outside the mathematical or physical domain of an operation."""


class ShapeError(JamsenseError, ValueError):
    """Tensor or sequence shapes are incompatible."""


class ConfigError(JamsenseError, ValueError):
    """A configuration object or file is invalid."""


class ParseError(JamsenseError, ValueError):
    """A persisted file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TrainingError(JamsenseError, RuntimeError):
    """Training diverged or otherwise failed."""

    def __init__(self, message, epoch=None):
        if epoch is not None:
            message = f"epoch {epoch}: {message}"
        super().__init__(message)
        self.epoch = epoch


class AltitudeWarning(UserWarning):
    """Altitude outside the UAV pathloss validity margin; result still computed."""
