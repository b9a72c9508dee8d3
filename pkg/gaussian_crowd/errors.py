from typing import Optional


class GaussianCrowdError(Exception):
    """Base class for every failure raised by the package"""


class InvalidInputError(GaussianCrowdError, ValueError):
    """Non-finite or out-of-domain numeric input"""


class DimensionMismatchError(GaussianCrowdError, ValueError):
    pass


# Configuration


class ConfigError(GaussianCrowdError):
    pass


class SceneConfigError(ConfigError):
    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class CapacityError(ConfigError):
    pass


# Assets and file formats


class AssetError(GaussianCrowdError):
    pass


class MissingAssetError(AssetError):
    def __init__(self, message: str, path: str):
        self.path = path
        super().__init__(message)


class FormatError(AssetError):
    pass


class BadMagicError(FormatError):
    pass


class VersionMismatchError(FormatError):
    pass


class TruncatedFileError(FormatError):
    def __init__(self, message: str, section: str, offset: int):
        self.section = section
        self.offset = offset
        super().__init__(message)


class TrailingDataError(FormatError):
    pass


class InvariantViolationError(FormatError):
    pass


# Model construction


class ModelError(GaussianCrowdError, ValueError):
    pass


class JointCountMismatchError(ModelError):
    pass


class EmptyClipError(ModelError):
    pass


class InvalidCountsError(ModelError):
    pass


class TemplateInvariantError(ModelError):
    pass
