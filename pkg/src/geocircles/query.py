"""Windowed aggregation, rates, frame evaluation, and pyramid-pruned
threshold queries over an immutable dataset. Everything here is a pure read."""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import (
    PopulationMissing,
    PyramidMissing,
    SeriesMissing,
    UnknownRegion,
    WindowTooLarge,
)
from .ingest import Dataset
from .model import (
    Calendar,
    Level,
    RateKind,
    RegionId,
    RegionValues,
    TimeWindow,
    VariableKind,
)

INCIDENCE_SCALE = 100_000


class Mode(Enum):
    TOTAL = "total"
    WINDOW = "window"


class Aggregation(Enum):
    CUMULATIVE = "cumulative"
    DAILY_AVERAGE = "daily_avg"


@dataclass(frozen=True)
class BBox:
    """Inclusive lat/lon rectangle."""

    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float

    def __post_init__(self):
        if self.min_lat > self.max_lat or self.min_lon > self.max_lon:
            raise ValueError("bbox minimums exceed maximums")

    def contains(self, lat: float, lon: float) -> bool:
        return self.min_lat <= lat <= self.max_lat and \
            self.min_lon <= lon <= self.max_lon


@dataclass(frozen=True)
class QuerySpec:
    mode: Mode
    range: TimeWindow
    window_size: int = 1
    aggregation: Aggregation = Aggregation.CUMULATIVE
    variables: tuple[VariableKind, ...] = ()
    rates: tuple[RateKind, ...] = ()
    level: Level = Level.COUNTRY
    bbox: Optional[BBox] = None

    def __post_init__(self):
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        if self.mode is Mode.WINDOW and self.window_size > self.range.length:
            raise WindowTooLarge(
                f"window {self.window_size} > range length {self.range.length}")

    @property
    def is_maximum(self) -> bool:
        return self.window_size == self.range.length

    @staticmethod
    def resolve_window_size(window: Union[int, str, None], range_: TimeWindow) -> int:
        """Maps the literal 'max' (the Maximum checkbox) to the range length."""
        if window is None or (isinstance(window, str) and window.lower() == "max"):
            return range_.length
        return int(window)


def window_value(dataset: Dataset, region: RegionId, var: VariableKind,
                 window: TimeWindow, agg: Aggregation = Aggregation.CUMULATIVE,
                 ) -> Union[int, float]:
    """Windowed aggregate of a cumulative series.

    Cumulative is C[end] - C[start-1] with C[-1] = 0 (clamped at zero, which
    only matters for the non-monotone Active series); daily average divides
    by the window length.
    """
    series = dataset.series_for(region, var)
    cum = series.cumulative
    total = int(cum[window.end_day])
    if window.start_day > 0:
        total -= int(cum[window.start_day - 1])
    total = max(total, 0)
    if agg is Aggregation.DAILY_AVERAGE:
        return total / window.length
    return total


def rate_value(dataset: Dataset, region: RegionId, rate: RateKind,
               window: TimeWindow, agg: Aggregation = Aggregation.CUMULATIVE,
               ) -> Optional[float]:
    """Windowed rate, or None when a denominator is zero (undefined).

    All rates are computed from window aggregates of their raw variables:
    incidence = 100000 * confirmed / population, mortality = deaths /
    confirmed, recovery = recovered / (deaths + recovered).
    """
    def agg_value(var: VariableKind) -> float:
        return window_value(dataset, region, var, window, agg)

    if rate is RateKind.INCIDENCE:
        population = dataset.region(region).population
        if population is None:
            raise PopulationMissing(f"{region} has no population")
        if population == 0:
            return None
        return INCIDENCE_SCALE * agg_value(VariableKind.CONFIRMED) / population
    if rate is RateKind.MORTALITY:
        confirmed = agg_value(VariableKind.CONFIRMED)
        if confirmed == 0:
            return None
        return agg_value(VariableKind.DEATHS) / confirmed
    recovered = agg_value(VariableKind.RECOVERED)
    denominator = agg_value(VariableKind.DEATHS) + recovered
    if denominator == 0:
        return None
    return recovered / denominator


def cluster_rate_fn(rates: Sequence[RateKind], agg: Aggregation, window_days: int):
    """Rate recomputation for clusters: summed raw inputs, never averaged rates."""
    def compute(totals: Mapping[VariableKind, int],
                population: Optional[int]) -> dict[RateKind, float]:
        def agg_total(var: VariableKind) -> Optional[float]:
            if var not in totals:
                return None
            value = totals[var]
            return value / window_days if agg is Aggregation.DAILY_AVERAGE else value

        out: dict[RateKind, float] = {}
        for rate in rates:
            if rate is RateKind.INCIDENCE:
                confirmed = agg_total(VariableKind.CONFIRMED)
                if confirmed is None or population is None or population == 0:
                    continue
                out[rate] = INCIDENCE_SCALE * confirmed / population
            elif rate is RateKind.MORTALITY:
                deaths = agg_total(VariableKind.DEATHS)
                confirmed = agg_total(VariableKind.CONFIRMED)
                if deaths is None or confirmed is None or confirmed == 0:
                    continue
                out[rate] = deaths / confirmed
            else:
                recovered = agg_total(VariableKind.RECOVERED)
                deaths = agg_total(VariableKind.DEATHS)
                if recovered is None or deaths is None or deaths + recovered == 0:
                    continue
                out[rate] = recovered / (deaths + recovered)
        return out
    return compute


def frame_dates(calendar: Calendar, spec: QuerySpec,
                ) -> list[tuple[dt.date, TimeWindow]]:
    """Ordered report dates with their effective windows.

    Window mode slides a fixed-width window; Total mode grows a prefix of the
    range. A window is always stamped on its last day.
    """
    if spec.range.end_day >= calendar.n_days:
        raise WindowTooLarge(
            f"range end {spec.range.end_day} outside calendar of {calendar.n_days} days")
    out: list[tuple[dt.date, TimeWindow]] = []
    if spec.mode is Mode.WINDOW:
        first = spec.range.start_day + spec.window_size - 1
        for end in range(first, spec.range.end_day + 1):
            window = TimeWindow(end - spec.window_size + 1, end)
            out.append((calendar.date_at(end), window))
    else:
        for end in range(spec.range.start_day, spec.range.end_day + 1):
            out.append((calendar.date_at(end), TimeWindow(spec.range.start_day, end)))
    return out


def window_for_date(calendar: Calendar, spec: QuerySpec, date: dt.date) -> TimeWindow:
    """Effective window for one report date; ValueError when the date is not
    one of the spec's report dates."""
    end = calendar.day_index(date)
    if spec.mode is Mode.WINDOW:
        first = spec.range.start_day + spec.window_size - 1
        if not first <= end <= spec.range.end_day:
            raise ValueError(f"{date.isoformat()} is not a report date of this query")
        return TimeWindow(end - spec.window_size + 1, end)
    if not spec.range.start_day <= end <= spec.range.end_day:
        raise ValueError(f"{date.isoformat()} is not a report date of this query")
    return TimeWindow(spec.range.start_day, end)


def _rate_inputs(rates: Sequence[RateKind]) -> tuple[VariableKind, ...]:
    needed: list[VariableKind] = []
    for rate in rates:
        for var in rate.constituents:
            if var not in needed:
                needed.append(var)
    return tuple(needed)


def evaluate_frame(dataset: Dataset, spec: QuerySpec, date: dt.date,
                   ) -> tuple[TimeWindow, list[RegionValues]]:
    """Values-only frame: one entry per anchored region at the spec's level
    inside the bbox. Missing series and undefined rates are omitted from the
    entry, never turned into query failures."""
    window = window_for_date(dataset.calendar, spec, date)
    entries: list[RegionValues] = []
    for region in dataset.regions_at(spec.level):
        if region.anchor is None:
            continue
        if spec.bbox is not None and not spec.bbox.contains(
                region.anchor.lat, region.anchor.lon):
            continue
        variables: dict[VariableKind, float] = {}
        for var in spec.variables:
            try:
                variables[var] = window_value(dataset, region.id, var, window,
                                              spec.aggregation)
            except SeriesMissing:
                continue
        rates: dict[RateKind, float] = {}
        for rate in spec.rates:
            try:
                value = rate_value(dataset, region.id, rate, window, spec.aggregation)
            except (SeriesMissing, PopulationMissing):
                continue
            if value is not None:
                rates[rate] = value
        if not variables and not rates:
            continue
        totals: dict[VariableKind, int] = {}
        for var in _rate_inputs(spec.rates):
            try:
                totals[var] = window_value(dataset, region.id, var, window,
                                           Aggregation.CUMULATIVE)
            except SeriesMissing:
                continue
        entries.append(RegionValues(
            region=region.id,
            display_name=region.display_name,
            anchor=region.anchor,
            variables=variables,
            rates=rates,
            totals=totals,
            population=region.population,
        ))
    return window, entries


@dataclass(frozen=True)
class FocusRow:
    date: dt.date
    window: TimeWindow
    focus: dict
    baseline: Optional[dict]


def _series_cells(dataset: Dataset, region: RegionId, window: TimeWindow,
                  spec: QuerySpec) -> dict:
    variables: dict[str, Optional[float]] = {}
    for var in spec.variables:
        try:
            variables[var.value] = window_value(dataset, region, var, window,
                                                spec.aggregation)
        except SeriesMissing:
            variables[var.value] = None
    rates: dict[str, Optional[float]] = {}
    for rate in spec.rates:
        try:
            rates[rate.value] = rate_value(dataset, region, rate, window,
                                           spec.aggregation)
        except (SeriesMissing, PopulationMissing):
            rates[rate.value] = None
    return {"variables": variables, "rates": rates}


def focus_series(dataset: Dataset, focus: RegionId,
                 baseline: Optional[RegionId], spec: QuerySpec) -> list[FocusRow]:
    """Per-date table of all selected variables and rates for the focus
    region, paired side-by-side with a baseline when one is given."""
    if focus not in dataset.regions:
        raise UnknownRegion(str(focus))
    if baseline is not None and baseline not in dataset.regions:
        raise UnknownRegion(str(baseline))
    rows: list[FocusRow] = []
    for date, window in frame_dates(dataset.calendar, spec):
        rows.append(FocusRow(
            date=date,
            window=window,
            focus=_series_cells(dataset, focus, window, spec),
            baseline=_series_cells(dataset, baseline, window, spec)
            if baseline is not None else None,
        ))
    return rows


class Pyramid:
    """Dyadic max tree over per-day increments, maximized across regions.

    Leaves hold the exact maximum single-day increment at (variable, level);
    a parent's stored value is the max of its children. A window-cumulative
    upper bound for any window size w inside a day span is w times the
    span's increment maximum, which stays valid for the non-monotone Active
    series because a sum of w terms never exceeds w times their maximum.
    """

    def __init__(self, variable: VariableKind, level: Level, leaves: np.ndarray):
        self.variable = variable
        self.level = level
        self.n_days = len(leaves)
        size = 1
        while size < max(self.n_days, 1):
            size *= 2
        self._size = size
        tree = np.full(2 * size, -math.inf)
        tree[size:size + self.n_days] = leaves
        for i in range(size - 1, 0, -1):
            tree[i] = max(tree[2 * i], tree[2 * i + 1])
        self._tree = tree

    @property
    def padded_days(self) -> int:
        """Power-of-two leaf count of the dyadic tree (>= n_days)."""
        return self._size

    def leaf(self, day: int) -> float:
        return float(self._tree[self._size + day])

    def range_max(self, start: int, end: int) -> float:
        """Maximum increment over day indices [start, end], inclusive."""
        start = max(start, 0)
        end = min(end, self.n_days - 1)
        if start > end:
            return -math.inf
        lo = start + self._size
        hi = end + self._size + 1
        best = -math.inf
        while lo < hi:
            if lo & 1:
                best = max(best, self._tree[lo])
                lo += 1
            if hi & 1:
                hi -= 1
                best = max(best, self._tree[hi])
            lo //= 2
            hi //= 2
        return float(best)

    def check_invariant(self) -> None:
        for i in range(1, self._size):
            assert self._tree[i] >= self._tree[2 * i]
            assert self._tree[i] >= self._tree[2 * i + 1]


def build_pyramid(dataset: Dataset, variable: VariableKind, level: Level) -> Pyramid:
    """Max daily increment per day across all regions at one level."""
    rows = []
    for region in dataset.regions_at(level):
        if dataset.has_series(region.id, variable):
            cum = dataset.series_for(region.id, variable).cumulative
            rows.append(np.diff(cum, prepend=0))
    if not rows:
        leaves = np.zeros(dataset.calendar.n_days)
    else:
        leaves = np.max(np.stack(rows), axis=0).astype(float)
    return Pyramid(variable, level, leaves)


@dataclass(frozen=True)
class ThresholdResult:
    matches: list[tuple[RegionId, list[dt.date]]]
    evaluated: int


Metric = Union[VariableKind, RateKind]


def threshold_query(dataset: Dataset, pyramid: Optional[Pyramid], metric: Metric,
                    op: str, value: float, level: Level, bbox: Optional[BBox],
                    temporal: TimeWindow, window_size: Union[int, str, None],
                    ) -> ThresholdResult:
    """Regions and report dates where the metric satisfies ``>= value`` or
    ``<= value``; identical to a brute-force scan, with the pyramid used only
    to prune report-date subtrees for the >= predicate on variables."""
    if op not in ("ge", "le"):
        raise ValueError(f"op must be 'ge' or 'le', got {op!r}")
    wsize = QuerySpec.resolve_window_size(window_size, temporal)
    if wsize > temporal.length:
        raise WindowTooLarge(f"window {wsize} > range length {temporal.length}")

    regions = []
    for region in dataset.regions_at(level):
        if bbox is not None:
            if region.anchor is None or not bbox.contains(region.anchor.lat,
                                                          region.anchor.lon):
                continue
        regions.append(region.id)

    first_report = temporal.start_day + wsize - 1
    report_days = range(first_report, temporal.end_day + 1)
    found: dict[RegionId, list[dt.date]] = {}
    evaluated = 0

    def matches(candidate: Optional[float]) -> bool:
        if candidate is None:
            return False
        return candidate >= value if op == "ge" else candidate <= value

    def evaluate_day(end: int) -> None:
        nonlocal evaluated
        window = TimeWindow(end - wsize + 1, end)
        for region_id in regions:
            try:
                if isinstance(metric, VariableKind):
                    candidate = window_value(dataset, region_id, metric, window)
                else:
                    candidate = rate_value(dataset, region_id, metric, window)
            except (SeriesMissing, PopulationMissing):
                continue
            evaluated += 1
            if matches(candidate):
                found.setdefault(region_id, []).append(
                    dataset.calendar.date_at(end))

    if isinstance(metric, VariableKind) and op == "ge":
        if pyramid is None or pyramid.variable is not metric or \
                pyramid.level is not level:
            raise PyramidMissing(
                f"need a pyramid for ({metric.value}, {level.value})")

        def descend(lo: int, hi: int) -> None:
            # lo..hi is a dyadic day span; prune it when no window ending in
            # it can reach the threshold.
            if lo > temporal.end_day or hi < first_report:
                return
            ra = max(lo, first_report)
            rb = min(hi, temporal.end_day)
            bound = wsize * pyramid.range_max(ra - wsize + 1, rb)
            if max(0.0, bound) < value:
                return
            if lo == hi:
                evaluate_day(lo)
                return
            mid = (lo + hi) // 2
            descend(lo, mid)
            descend(mid + 1, hi)

        descend(0, pyramid.padded_days - 1)
    else:
        for end in report_days:
            evaluate_day(end)

    matches_list = [(region_id, found[region_id]) for region_id in sorted(found)]
    return ThresholdResult(matches=matches_list, evaluated=evaluated)
