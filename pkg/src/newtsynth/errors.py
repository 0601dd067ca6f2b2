"""Exception types shared across the engine."""


class NewtError(Exception):
    """Base class for all engine errors."""


class FormatError(NewtError):
    """The byte container of a .newt file is malformed (magic, version, truncation)."""


class SchemaError(NewtError):
    """File contents are structurally valid but inconsistent with the model schema."""


class ControlCsvError(NewtError):
    """A control CSV file is malformed. Carries the offending 1-based row number."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row
