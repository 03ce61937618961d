"""Exception hierarchy.

The CLI maps these onto exit codes: configuration problems exit 3, bad input
data exits 4, numerical failures exit 5.
"""


class PropDmgError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(PropDmgError, ValueError):
    pass


class DataError(PropDmgError, ValueError):
    pass


class NumericError(PropDmgError, ArithmeticError):
    pass


class GeometryError(ConfigError):
    pass


class ParseError(DataError):
    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class LogValidationError(ParseError):
    pass


class LogTooShortError(DataError):
    pass


class NotFittedError(PropDmgError, RuntimeError):
    pass


class SchemaError(DataError):
    pass
