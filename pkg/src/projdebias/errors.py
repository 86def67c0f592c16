"""Exception types shared across the package."""


class ProjDebiasError(Exception):
    """Base class for all package errors."""


class ParseError(ProjDebiasError, ValueError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class UnknownTokenError(ProjDebiasError, KeyError):
    def __init__(self, token):
        self.token = token
        super().__init__(token)

    def __str__(self):
        return f"unknown token {self.token!r}"


class DegenerateDirectionError(ProjDebiasError, ValueError):
    """Raised when a projection direction would be the zero vector."""


class DataError(ProjDebiasError, ValueError):
    """Input data violates a precondition (sizes, splits, labels)."""
