"""Exception types shared across the package."""


class PhytokenError(Exception):
    """Base class for all phytoken errors."""


class XMLParseError(PhytokenError):
    """Malformed XML input; carries the 1-based line/column of the failure."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ValidationError(PhytokenError):
    """A document violates the schema or a domain invariant.

    ``path`` names the offending element, e.g. ``plant/shoot[0]/phytomer[2]``.
    """

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class DecodeError(PhytokenError):
    """A token sequence cannot be decoded; ``position`` is the token index
    when one applies."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message if position is None else f"token {position}: {message}")
        self.position = position
