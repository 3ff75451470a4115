"""Exception types raised across the package."""


class InvalidParameterError(ValueError):
    """A parameter lies outside the range an operation accepts."""


class SeriesTooShortError(InvalidParameterError):
    """The series admits no valid split for the requested window size.

    Raised instead of returning an empty profile so callers can tell a
    series that cannot be scored apart from one whose scores are all low.
    """


class ParseError(ValueError):
    """An input file could not be turned into a time series record."""

    def __init__(self, message, *, path=None, line=None, field=None):
        self.path = path
        self.line = line
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = ", ".join(where) + ": " if where else ""
        super().__init__(prefix + message)
