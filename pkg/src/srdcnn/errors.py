"""Exception hierarchy shared by every module."""


class SrdcnnError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SrdcnnError, ValueError):
    pass


class LabelError(SrdcnnError, ValueError):
    pass


class DataError(SrdcnnError, ValueError):
    pass


class ParseError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FormatError(DataError):
    pass


class ConfigurationError(SrdcnnError, ValueError):
    pass


class DegenerateBatchError(SrdcnnError, ValueError):
    pass


class UsageError(SrdcnnError, RuntimeError):
    pass


class NumericError(SrdcnnError, ArithmeticError):
    pass


class IncompatibleCheckpointError(SrdcnnError):
    pass


class CorruptCheckpointError(SrdcnnError):
    pass
