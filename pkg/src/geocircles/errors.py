"""Exception types raised across the package."""


class GeocirclesError(Exception):
    """Base class for all domain errors."""


class OutOfCalendar(GeocirclesError):
    """Date or day index falls outside the dataset calendar."""


class MalformedHeader(GeocirclesError):
    """CSV header is missing required columns or has unusable date columns."""


class RaggedRow(GeocirclesError):
    """CSV data row has a different cell count than the header."""

    def __init__(self, row: int, expected: int, got: int):
        super().__init__(f"row {row}: expected {expected} cells, got {got}")
        self.row = row
        self.expected = expected
        self.got = got


class NonNumericCell(GeocirclesError):
    """CSV cell that must be numeric is not."""

    def __init__(self, row: int, column: str, text: str):
        super().__init__(f"row {row}, column {column!r}: non-numeric value {text!r}")
        self.row = row
        self.column = column
        self.text = text


class NegativePopulation(GeocirclesError):
    """Population lookup contains a negative value."""


class LengthMismatch(GeocirclesError):
    """Series that must share a calendar have different lengths."""


class DuplicateRegionRow(GeocirclesError):
    """The same region appears twice in one input file."""


class SeriesMissing(GeocirclesError):
    """No series ingested for the requested (region, variable) pair."""


class PopulationMissing(GeocirclesError):
    """Region has no population, so population-normalized rates are undefined."""


class WindowTooLarge(GeocirclesError):
    """Requested window size exceeds the animation range."""


class PyramidMissing(GeocirclesError):
    """Threshold query over a variable needs a pyramid built for (variable, level)."""


class LatOutOfRange(GeocirclesError):
    """Latitude outside the Web-Mercator projectable band."""


class InvalidSpec(GeocirclesError):
    """Scaling specification violates its constraints."""


class AllZero(GeocirclesError):
    """Reference fitting needs at least one positive value."""


class UnknownRegion(GeocirclesError):
    """Region id does not exist in the dataset."""


class SnapshotTooNew(GeocirclesError):
    """Snapshot file was written by a newer schema than this build understands."""
