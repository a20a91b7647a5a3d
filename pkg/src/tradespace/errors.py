"""Exception hierarchy. ValidationError covers bad user input (CLI exit 1)."""


class TradespaceError(Exception):
    pass


class ValidationError(TradespaceError):
    """Input violates a documented precondition."""


# --- panel ingestion ---------------------------------------------------------

class MissingColumn(ValidationError):
    pass


class BadValue(ValidationError):
    """A cell does not parse as a finite non-negative real."""


class NegativeValue(BadValue):
    pass


class DuplicateKey(ValidationError):
    pass


class EmptyRowOrColumn(ValidationError):
    """A product/country has no positive export value in some year."""

    def __init__(self, year: int, kind: str, code: str):
        self.year, self.kind, self.code = year, kind, code
        super().__init__(f"{kind} {code!r} has no positive value in {year}")


class EmptyPanel(ValidationError):
    pass


class BadGroupId(ValidationError):
    pass


# --- matrix pipeline ---------------------------------------------------------

class YearNotFound(ValidationError):
    pass


class DegenerateTotals(TradespaceError):
    """A zero row/column total survived panel validation."""


class RegistryMismatch(ValidationError):
    pass


class NonIncreasingYears(ValidationError):
    pass


class TooFewYears(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class EmptyRcaMatrix(ValidationError):
    pass


class PeriodMismatch(ValidationError):
    pass


class EmptySample(ValidationError):
    pass


# --- CLI ---------------------------------------------------------------------

class MissingUpstream(ValidationError):
    pass


class BadFlag(ValidationError):
    pass
