"""Exception hierarchy. Each class carries the exit code the CLI reports for it."""


class LtridpError(Exception):
    exit_code: int = 1


class ConfigError(LtridpError):
    exit_code = 2


class ImageIOError(LtridpError, OSError):
    exit_code = 2


class ImageFormatError(LtridpError, ValueError):
    exit_code = 2


class ImageSizeError(LtridpError, ValueError):
    exit_code = 2


class OutOfDomainError(LtridpError, IndexError):
    exit_code = 2


class DimensionMismatchError(LtridpError, ValueError):
    exit_code = 2


class EmptyInputError(LtridpError, ValueError):
    exit_code = 2


class ManifestError(LtridpError, ValueError):
    exit_code = 2


class FeatureStoreError(LtridpError, ValueError):
    exit_code = 2


class ModelFileError(LtridpError, ValueError):
    exit_code = 2


class ValidationSchemeError(LtridpError, ValueError):
    """A split or fold precondition does not hold."""
    exit_code = 2


class SingleClassError(LtridpError, ValueError):
    exit_code = 3


class HeaderMismatchError(LtridpError):
    """Model and feature store were produced with different descriptor settings."""
    exit_code = 4


class LabelError(LtridpError, ValueError):
    """A class label other than +1 or -1."""
    exit_code = 2
