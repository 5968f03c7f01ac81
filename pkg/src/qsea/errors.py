"""Exception types shared across the package."""


class QseaError(Exception):
    """Base class for all package errors."""


class DimensionError(QseaError, ValueError):
    pass


class DegenerateInputError(QseaError, ValueError):
    pass


class QubitIndexError(QseaError, IndexError):
    pass


class ParameterError(QseaError, ValueError):
    pass


class UnsupportedGateError(QseaError, ValueError):
    pass


class InsufficientDataError(QseaError, ValueError):
    pass


class ReductionError(QseaError, ValueError):
    pass


class RangeError(QseaError, ValueError):
    pass


class ArityError(QseaError, ValueError):
    pass


class FormatError(QseaError, ValueError):
    pass


class TruncatedFileError(FormatError):
    pass


class ConsistencyError(QseaError, ValueError):
    pass


class ConfigError(QseaError, ValueError):
    pass
