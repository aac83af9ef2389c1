"""JHU-format CSV ingestion: parsing, cleaning, Active derivation, dataset assembly.

Input layout is the Johns Hopkins global time-series CSV: a header of
``Province/State, Country/Region, Lat, Long`` followed by one column per day
formatted ``M/D/YY``, one row per region with cumulative counts.
"""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import io
import math
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import (
    DuplicateRegionRow,
    LengthMismatch,
    MalformedHeader,
    NegativePopulation,
    NonNumericCell,
    RaggedRow,
    SeriesMissing,
    UnknownRegion,
)
from .model import (
    Calendar,
    DailySeries,
    LatLon,
    Level,
    Region,
    RegionId,
    VariableKind,
)

TIMESERIES_COLUMNS = ("Province/State", "Country/Region", "Lat", "Long")
POPULATION_COLUMNS = ("Country_Region", "Population")


@dataclass
class ParsedTable:
    """One parsed time-series CSV: calendar plus (region, raw cumulative) rows."""

    variable: VariableKind
    calendar: Calendar
    rows: list[tuple[Region, np.ndarray]]
    # Raw display names of coarser path components seen in the file, used to
    # label synthesized parents (e.g. "Australia" from its state rows).
    name_hints: dict[RegionId, str] = field(default_factory=dict)


@dataclass(frozen=True)
class IngestReport:
    rows: int
    regions: int
    adjusted_cells: int
    anchorless: int
    date_range: tuple[str, str]
    variables: tuple[str, ...]
    incidence_available: bool

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "regions": self.regions,
            "adjusted_cells": self.adjusted_cells,
            "anchorless": self.anchorless,
            "date_range": list(self.date_range),
            "variables": list(self.variables),
            "incidence_available": self.incidence_available,
        }


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable ingested dataset; safe for arbitrary concurrent readers."""

    calendar: Calendar
    regions: Mapping[RegionId, Region]
    series: Mapping[tuple[RegionId, VariableKind], DailySeries]
    children: Mapping[RegionId, tuple[RegionId, ...]]
    synthesized: frozenset[RegionId]
    report: IngestReport
    version: str

    def region(self, region_id: RegionId) -> Region:
        try:
            return self.regions[region_id]
        except KeyError:
            raise UnknownRegion(str(region_id)) from None

    def series_for(self, region_id: RegionId, variable: VariableKind) -> DailySeries:
        try:
            return self.series[(region_id, variable)]
        except KeyError:
            raise SeriesMissing(f"{region_id} has no {variable.value} series") from None

    def has_series(self, region_id: RegionId, variable: VariableKind) -> bool:
        return (region_id, variable) in self.series

    def regions_at(self, level: Level) -> list[Region]:
        return sorted((r for r in self.regions.values() if r.level is level),
                      key=lambda r: r.id)

    def variables_present(self) -> list[VariableKind]:
        present = {var for (_, var) in self.series}
        return [v for v in VariableKind if v in present]

    def levels_present(self) -> list[Level]:
        present = {r.level for r in self.regions.values()}
        return [lv for lv in Level if lv in present]


def _decode(content: Union[bytes, str, IO]) -> io.StringIO:
    if isinstance(content, bytes):
        return io.StringIO(content.decode("utf-8-sig"))
    if isinstance(content, str):
        return io.StringIO(content.lstrip("﻿"))
    data = content.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    return io.StringIO(data.lstrip("﻿"))


def _parse_date_header(columns: Sequence[str]) -> Calendar:
    if not columns:
        raise MalformedHeader("no date columns after Lat/Long")
    dates = []
    for col in columns:
        try:
            dates.append(dt.datetime.strptime(col.strip(), "%m/%d/%y").date())
        except ValueError:
            raise MalformedHeader(f"unparseable date column {col!r}") from None
    for prev, cur in zip(dates, dates[1:]):
        if cur != prev + dt.timedelta(days=1):
            raise MalformedHeader(f"date columns not consecutive at {cur.isoformat()}")
    return Calendar(epoch=dates[0], n_days=len(dates))


def _cell_number(text: str, row: int, column: str) -> int:
    try:
        value = float(text)
    except ValueError:
        raise NonNumericCell(row, column, text) from None
    if not math.isfinite(value):
        raise NonNumericCell(row, column, text)
    return int(value)


def parse_timeseries_csv(content: Union[bytes, str, IO], variable: VariableKind) -> ParsedTable:
    """Parse one JHU-layout time-series CSV into regions and raw cumulative rows.

    Rows with blank Lat/Long become anchorless regions: still queryable in
    tables, excluded from frames and the spatial index.
    """
    reader = csv.reader(_decode(content))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedHeader("empty file") from None
    header = [h.strip() for h in header]
    for required in TIMESERIES_COLUMNS:
        if required not in header:
            raise MalformedHeader(f"missing column {required!r}")
    idx = {name: header.index(name) for name in TIMESERIES_COLUMNS}
    first_date_col = max(idx.values()) + 1
    calendar = _parse_date_header(header[first_date_col:])

    rows: list[tuple[Region, np.ndarray]] = []
    hints: dict[RegionId, str] = {}
    for row_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise RaggedRow(row_no, len(header), len(row))
        state_name = row[idx["Province/State"]].strip()
        country_name = row[idx["Country/Region"]].strip()
        if not country_name:
            raise MalformedHeader(f"row {row_no}: blank Country/Region")
        region_id = RegionId(country_name, state_name)
        hints[RegionId(country_name)] = country_name

        lat_text = row[idx["Lat"]].strip()
        lon_text = row[idx["Long"]].strip()
        anchor = None
        if lat_text and lon_text:
            try:
                anchor = LatLon(float(lat_text), float(lon_text))
            except ValueError as exc:
                if "outside" in str(exc):
                    raise
                bad_col = "Lat" if _is_non_numeric(lat_text) else "Long"
                raise NonNumericCell(row_no, bad_col, row[idx[bad_col]]) from None

        values = np.array(
            [_cell_number(cell, row_no, header[first_date_col + i])
             for i, cell in enumerate(row[first_date_col:])],
            dtype=np.int64,
        )
        region = Region(
            id=region_id,
            display_name=state_name or country_name,
            level=region_id.level,
            anchor=anchor,
        )
        rows.append((region, values))
    return ParsedTable(variable=variable, calendar=calendar, rows=rows, name_hints=hints)


def _is_non_numeric(text: str) -> bool:
    try:
        float(text)
        return False
    except ValueError:
        return True


def parse_population_csv(content: Union[bytes, str, IO]) -> dict[RegionId, int]:
    """Parse a JHU UID-lookup style CSV into a RegionId -> persons map.

    Rows with a blank Population cell are omitted.
    """
    reader = csv.reader(_decode(content))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise MalformedHeader("empty file") from None
    for required in POPULATION_COLUMNS:
        if required not in header:
            raise MalformedHeader(f"missing column {required!r}")
    idx_country = header.index("Country_Region")
    idx_pop = header.index("Population")
    idx_state = header.index("Province_State") if "Province_State" in header else None
    idx_county = header.index("Admin2") if "Admin2" in header else None

    populations: dict[RegionId, int] = {}
    for row_no, row in enumerate(reader, start=2):
        if not row:
            continue
        pop_text = row[idx_pop].strip() if idx_pop < len(row) else ""
        if not pop_text:
            continue
        country = row[idx_country].strip()
        if not country:
            continue
        state = row[idx_state].strip() if idx_state is not None and idx_state < len(row) else ""
        county = row[idx_county].strip() if idx_county is not None and idx_county < len(row) else ""
        value = _cell_number(pop_text, row_no, "Population")
        if value < 0:
            raise NegativePopulation(f"row {row_no}: population {value}")
        populations[RegionId(country, state, county)] = value
    return populations


def clean_series(raw: np.ndarray) -> tuple[np.ndarray, int]:
    """Make a raw cumulative series monotone via the backward minimum envelope.

    out[d] = min(raw[d], out[d+1]); the final official total is preserved and
    earlier over-reports are lowered. Returns (cleaned, adjusted cell count).
    """
    raw = np.asarray(raw, dtype=np.int64)
    if raw.size == 0:
        return raw.copy(), 0
    cleaned = np.minimum.accumulate(raw[::-1])[::-1]
    cleaned = np.maximum(cleaned, 0)
    return cleaned, int(np.count_nonzero(cleaned != raw))


def derive_active(confirmed: DailySeries, deaths: DailySeries,
                  recovered: DailySeries) -> DailySeries:
    """Active cases: confirmed minus deaths and recoveries, clamped at zero."""
    if not (len(confirmed) == len(deaths) == len(recovered)):
        raise LengthMismatch(
            f"lengths {len(confirmed)}/{len(deaths)}/{len(recovered)} differ")
    if not (confirmed.region == deaths.region == recovered.region):
        raise ValueError("active inputs must belong to one region")
    values = np.maximum(
        confirmed.cumulative - deaths.cumulative - recovered.cumulative, 0)
    return DailySeries(confirmed.region, VariableKind.ACTIVE, values)


def _mean_anchor(children: Iterable[Region]) -> Optional[LatLon]:
    anchored = [c.anchor for c in children if c.anchor is not None]
    if not anchored:
        return None
    return LatLon(sum(a.lat for a in anchored) / len(anchored),
                  sum(a.lon for a in anchored) / len(anchored))


def content_hash(calendar: Calendar, regions: Mapping[RegionId, Region],
                 series: Mapping[tuple[RegionId, VariableKind], DailySeries]) -> str:
    """Deterministic content hash; identical inputs always hash identically."""
    digest = hashlib.sha256()
    digest.update(f"{calendar.epoch.isoformat()}:{calendar.n_days}".encode())
    for region_id in sorted(regions):
        region = regions[region_id]
        anchor = f"{region.anchor.lat!r},{region.anchor.lon!r}" if region.anchor else "-"
        boundary = ";".join(f"{p.lat!r},{p.lon!r}" for p in region.boundary or ())
        digest.update(
            f"|{region_id.path}|{region.display_name}|{region.level.value}"
            f"|{anchor}|{region.population}|{boundary}".encode())
    for key in sorted(series, key=lambda k: (k[0], k[1].value)):
        digest.update(f"|{key[0].path}:{key[1].value}:".encode())
        digest.update(series[key].cumulative.tobytes())
    return digest.hexdigest()


def build_dataset(tables: Sequence[ParsedTable],
                  populations: Optional[Mapping[RegionId, int]] = None) -> Dataset:
    """Clean, roll up, and join parsed tables into an immutable Dataset.

    Parents with no ingested row of their own get a synthesized series equal
    to the pointwise sum of their children; directly ingested parents are
    kept verbatim. Active is derived wherever its three inputs exist.
    """
    if not tables:
        raise ValueError("need at least one parsed table")
    calendar = tables[0].calendar
    for table in tables[1:]:
        if table.calendar != calendar:
            raise ValueError("tables do not share one date header")

    populations = dict(populations or {})
    regions: dict[RegionId, Region] = {}
    series: dict[tuple[RegionId, VariableKind], DailySeries] = {}
    name_hints: dict[RegionId, str] = {}
    total_rows = 0
    adjusted_cells = 0

    for table in tables:
        seen: set[RegionId] = set()
        name_hints.update(table.name_hints)
        for region, raw in table.rows:
            if region.id in seen:
                raise DuplicateRegionRow(
                    f"{region.id} appears twice in {table.variable.value} file")
            seen.add(region.id)
            total_rows += 1
            if len(raw) != calendar.n_days:
                raise LengthMismatch(
                    f"{region.id}: {len(raw)} values vs {calendar.n_days} dates")
            cleaned, adjusted = clean_series(raw)
            adjusted_cells += adjusted
            regions.setdefault(region.id, region)
            series[(region.id, table.variable)] = DailySeries(
                region.id, table.variable, cleaned)

    # Synthesize missing parents bottom-up (county -> state -> country).
    synthesized: set[RegionId] = set()
    for level in (Level.COUNTY, Level.STATE):
        child_groups: dict[RegionId, list[RegionId]] = {}
        for region_id in list(regions):
            if region_id.level is level:
                parent = region_id.parent()
                assert parent is not None
                child_groups.setdefault(parent, []).append(region_id)
        for parent_id, child_ids in sorted(child_groups.items()):
            child_ids.sort()
            if parent_id not in regions:
                children_regions = [regions[c] for c in child_ids]
                regions[parent_id] = Region(
                    id=parent_id,
                    display_name=name_hints.get(
                        parent_id, parent_id.path.split("/")[-1].title()),
                    level=parent_id.level,
                    anchor=_mean_anchor(children_regions),
                )
                synthesized.add(parent_id)
            for variable in VariableKind.ingestable():
                if (parent_id, variable) in series:
                    continue
                child_series = [series[(c, variable)] for c in child_ids
                                if (c, variable) in series]
                if not child_series:
                    continue
                summed = np.sum([s.cumulative for s in child_series], axis=0)
                series[(parent_id, variable)] = DailySeries(parent_id, variable, summed)

    # Join populations; synthesized parents fall back to the sum of their
    # children only when every child has one (partial sums would understate).
    children_map: dict[RegionId, list[RegionId]] = {}
    for region_id in regions:
        parent = region_id.parent()
        if parent is not None and parent in regions:
            children_map.setdefault(parent, []).append(region_id)
    for region_id, region in list(regions.items()):
        population = populations.get(region_id)
        if population is None and region_id in synthesized:
            child_pops = [populations.get(c) for c in children_map.get(region_id, [])]
            if child_pops and all(p is not None for p in child_pops):
                population = sum(child_pops)
        if population is not None:
            regions[region_id] = replace(region, population=population)

    for region_id in sorted(regions):
        triple = [(region_id, v) for v in
                  (VariableKind.CONFIRMED, VariableKind.DEATHS, VariableKind.RECOVERED)]
        if all(key in series for key in triple):
            series[(region_id, VariableKind.ACTIVE)] = derive_active(
                series[triple[0]], series[triple[1]], series[triple[2]])

    anchorless = sum(1 for r in regions.values() if not r.anchored)
    report = IngestReport(
        rows=total_rows,
        regions=len(regions),
        adjusted_cells=adjusted_cells,
        anchorless=anchorless,
        date_range=(calendar.epoch.isoformat(), calendar.last.isoformat()),
        variables=tuple(v.value for v in VariableKind
                        if any(key[1] is v for key in series)),
        incidence_available=any(r.population is not None for r in regions.values()),
    )
    return Dataset(
        calendar=calendar,
        regions=dict(sorted(regions.items())),
        series=series,
        children={parent: tuple(sorted(kids)) for parent, kids in sorted(children_map.items())},
        synthesized=frozenset(synthesized),
        report=report,
        version=content_hash(calendar, regions, series),
    )
