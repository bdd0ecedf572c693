"""Exception types raised across the package."""


class PmtnetError(Exception):
    """Base class for all package errors."""


class ShapeError(PmtnetError, ValueError):
    pass


class StateError(PmtnetError, RuntimeError):
    pass


class LabelError(PmtnetError, ValueError):
    pass


class DataError(PmtnetError, ValueError):
    pass


class DomainError(PmtnetError, ValueError):
    pass


class ConfigError(PmtnetError, ValueError):
    pass


class KindError(PmtnetError, TypeError):
    pass


class BuildError(PmtnetError, RuntimeError):
    pass


class FormatError(PmtnetError, ValueError):
    pass
