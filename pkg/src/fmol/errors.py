"""Exception types shared across the package."""


class FmolError(Exception):
    """Base class for all errors raised by this package."""


class CatalogError(FmolError):
    """Unknown unit id or malformed catalog lookup."""


class SchemaError(FmolError):
    """Parameter list does not match a unit's catalog schema."""


class AddressError(FmolError):
    """Parameter address does not resolve within a patch."""


class ValueRangeError(FmolError):
    """Normalized value outside [0, 1] or field outside its range."""


class PatchError(FmolError):
    """Patch violates the fixed 6-track / 1+3 / 4-LFO topology."""


class ParseError(FmolError):
    """Scorefile text could not be parsed; carries a 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")
