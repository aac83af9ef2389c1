"""Core domain types: regions, calendar, series, windows, scaling spec, frames.

Everything here is immutable after construction and safe to share across
threads; no I/O happens in this module.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Optional

import numpy as np

from .errors import InvalidSpec, OutOfCalendar

PATH_SEPARATOR = "/"


class Level(Enum):
    COUNTRY = "country"
    STATE = "state"
    COUNTY = "county"

    @property
    def depth(self) -> int:
        return (Level.COUNTRY, Level.STATE, Level.COUNTY).index(self)


@dataclass(frozen=True, order=True)
class RegionId:
    """Canonical lowercase (country, state, county) path.

    Missing components are empty strings, which gives a total ordering for
    free and keeps tie-breaking deterministic everywhere.
    """

    country: str
    state: str = ""
    county: str = ""

    def __post_init__(self):
        object.__setattr__(self, "country", self.country.strip().lower())
        object.__setattr__(self, "state", self.state.strip().lower())
        object.__setattr__(self, "county", self.county.strip().lower())
        if not self.country:
            raise ValueError("region id needs a non-empty country")
        if self.county and not self.state:
            raise ValueError("county-level id needs a state component")

    @property
    def level(self) -> Level:
        if self.county:
            return Level.COUNTY
        if self.state:
            return Level.STATE
        return Level.COUNTRY

    def parent(self) -> Optional["RegionId"]:
        if self.county:
            return RegionId(self.country, self.state)
        if self.state:
            return RegionId(self.country)
        return None

    @property
    def path(self) -> str:
        parts = [self.country]
        if self.state:
            parts.append(self.state)
        if self.county:
            parts.append(self.county)
        return PATH_SEPARATOR.join(parts)

    @classmethod
    def from_path(cls, text: str) -> "RegionId":
        parts = [p for p in text.split(PATH_SEPARATOR)]
        if not 1 <= len(parts) <= 3:
            raise ValueError(f"bad region path {text!r}")
        return cls(*parts)

    def __str__(self) -> str:
        return self.path


@dataclass(frozen=True)
class LatLon:
    lat: float
    lon: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class Region:
    id: RegionId
    display_name: str
    level: Level
    anchor: Optional[LatLon] = None
    population: Optional[int] = None
    parent: Optional[RegionId] = None
    boundary: Optional[tuple[LatLon, ...]] = None

    def __post_init__(self):
        if self.level is not self.id.level:
            raise ValueError(f"level {self.level} inconsistent with path {self.id.path!r}")
        if self.population is not None and self.population < 0:
            raise ValueError("population must be >= 0")
        if self.parent is None:
            object.__setattr__(self, "parent", self.id.parent())
        elif self.parent.level.depth != self.level.depth - 1:
            raise ValueError("parent level must be exactly one coarser")

    @property
    def anchored(self) -> bool:
        return self.anchor is not None


class VariableKind(Enum):
    CONFIRMED = "confirmed"
    DEATHS = "deaths"
    RECOVERED = "recovered"
    ACTIVE = "active"
    VACCINATIONS = "vaccinations"

    @classmethod
    def ingestable(cls) -> tuple["VariableKind", ...]:
        # Active is always derived from the other three, never read from disk.
        return (cls.CONFIRMED, cls.DEATHS, cls.RECOVERED, cls.VACCINATIONS)


class RateKind(Enum):
    INCIDENCE = "incidence"
    MORTALITY = "mortality"
    RECOVERY = "recovery"

    @property
    def constituents(self) -> tuple[VariableKind, ...]:
        return _RATE_CONSTITUENTS[self]

    @property
    def needs_population(self) -> bool:
        return self is RateKind.INCIDENCE


_RATE_CONSTITUENTS = {
    RateKind.INCIDENCE: (VariableKind.CONFIRMED,),
    RateKind.MORTALITY: (VariableKind.DEATHS, VariableKind.CONFIRMED),
    RateKind.RECOVERY: (VariableKind.RECOVERED, VariableKind.DEATHS),
}

# Default palette; a rate reuses the color of the variable it normalizes.
VARIABLE_COLORS: Mapping[VariableKind, str] = {
    VariableKind.CONFIRMED: "black",
    VariableKind.DEATHS: "red",
    VariableKind.ACTIVE: "yellow",
    VariableKind.RECOVERED: "green",
    VariableKind.VACCINATIONS: "blue",
}
RATE_COLORS: Mapping[RateKind, str] = {
    RateKind.INCIDENCE: VARIABLE_COLORS[VariableKind.CONFIRMED],
    RateKind.MORTALITY: VARIABLE_COLORS[VariableKind.DEATHS],
    RateKind.RECOVERY: VARIABLE_COLORS[VariableKind.RECOVERED],
}

STROKE_BROKEN = "broken"
STROKE_SOLID = "solid"


@dataclass(frozen=True)
class Calendar:
    """Shared daily calendar: consecutive dates starting at an epoch."""

    epoch: dt.date
    n_days: int

    def __post_init__(self):
        if self.n_days < 1:
            raise ValueError("calendar needs at least one day")

    def day_index(self, date: dt.date) -> int:
        index = (date - self.epoch).days
        if not 0 <= index < self.n_days:
            raise OutOfCalendar(f"{date.isoformat()} outside calendar "
                                f"[{self.epoch.isoformat()}, {self.last.isoformat()}]")
        return index

    def date_at(self, index: int) -> dt.date:
        if not 0 <= index < self.n_days:
            raise OutOfCalendar(f"day index {index} outside [0, {self.n_days})")
        return self.epoch + dt.timedelta(days=index)

    @property
    def last(self) -> dt.date:
        return self.epoch + dt.timedelta(days=self.n_days - 1)

    def dates(self) -> Iterator[dt.date]:
        for i in range(self.n_days):
            yield self.epoch + dt.timedelta(days=i)


@dataclass(frozen=True, eq=False)
class DailySeries:
    """Per-region, per-variable cumulative daily values on the shared calendar."""

    region: RegionId
    variable: VariableKind
    cumulative: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.cumulative, dtype=np.int64)
        values.setflags(write=False)
        object.__setattr__(self, "cumulative", values)

    def __len__(self) -> int:
        return len(self.cumulative)


@dataclass(frozen=True)
class TimeWindow:
    """Inclusive day-index range [start_day, end_day]."""

    start_day: int
    end_day: int

    def __post_init__(self):
        if self.start_day < 0 or self.start_day > self.end_day:
            raise ValueError(f"bad window [{self.start_day}, {self.end_day}]")

    @property
    def length(self) -> int:
        return self.end_day - self.start_day + 1


class ScalingMethod(Enum):
    LINEAR = "linear"
    LOG = "log"
    FLANNERY = "flannery"


@dataclass(frozen=True)
class ScalingSpec:
    method: ScalingMethod = ScalingMethod.FLANNERY
    base_radius_px: float = 40.0
    reference_value: float = 1.0
    user_factor: float = 1.0
    r_min_px: float = 2.0
    r_max_px: float = 120.0

    def __post_init__(self):
        if self.base_radius_px <= 0:
            raise InvalidSpec("base_radius_px must be > 0")
        if self.reference_value <= 0:
            raise InvalidSpec("reference_value must be > 0")
        if not 0.1 <= self.user_factor <= 8.0:
            raise InvalidSpec("user_factor must be within [0.1, 8.0]")
        if not 0 < self.r_min_px < self.r_max_px:
            raise InvalidSpec("need 0 < r_min_px < r_max_px")


@dataclass(frozen=True)
class CircleSpec:
    """One concentric circle of a frame entry."""

    kind: str           # "variable" | "rate"
    name: str
    value: float
    radius_px: float
    stroke: str
    color: str

    @classmethod
    def for_variable(cls, var: VariableKind, value: float, radius_px: float) -> "CircleSpec":
        return cls("variable", var.value, value, radius_px, STROKE_BROKEN, VARIABLE_COLORS[var])

    @classmethod
    def for_rate(cls, rate: RateKind, value: float, radius_px: float) -> "CircleSpec":
        return cls("rate", rate.value, value, radius_px, STROKE_SOLID, RATE_COLORS[rate])


@dataclass(frozen=True)
class FrameEntry:
    target: str                      # region path of the cluster anchor member
    label: str
    lat: float
    lon: float
    members: tuple[str, ...]
    circles: tuple[CircleSpec, ...]
    highlight: bool = False


@dataclass(frozen=True)
class GeocircleFrame:
    """Complete per-date answer: one drawable entry per region or cluster."""

    date: dt.date
    window: TimeWindow
    entries: tuple[FrameEntry, ...]


@dataclass(frozen=True)
class RegionValues:
    """Windowed values for a single region, before clustering and scaling.

    ``totals`` holds cumulative window aggregates of the raw variables a rate
    is built from, so clusters can recompute rates from summed inputs instead
    of averaging member rates.
    """

    region: RegionId
    display_name: str
    anchor: LatLon
    variables: Mapping[VariableKind, float] = field(default_factory=dict)
    rates: Mapping[RateKind, float] = field(default_factory=dict)
    totals: Mapping[VariableKind, int] = field(default_factory=dict)
    population: Optional[int] = None

    @property
    def all_zero(self) -> bool:
        return all(v == 0 for v in self.variables.values()) and \
            all(v == 0 for v in self.rates.values())
