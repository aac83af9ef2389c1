"""Shared fixtures: bundled JHU-format files and synthetic dataset builders."""

from __future__ import annotations

import datetime as dt
import random
from pathlib import Path

import numpy as np
import pytest

from geocircles.ingest import (
    Dataset,
    ParsedTable,
    build_dataset,
    parse_population_csv,
    parse_timeseries_csv,
)
from geocircles.model import Calendar, LatLon, Level, Region, RegionId, VariableKind

DATA_DIR = Path(__file__).parent / "data"
EPOCH = dt.date(2020, 1, 22)


@pytest.fixture(scope="session")
def jhu_dir() -> Path:
    return DATA_DIR / "jhu"


@pytest.fixture(scope="session")
def jhu_clean_dir() -> Path:
    return DATA_DIR / "jhu_clean"


def load_jhu_dataset(directory: Path) -> Dataset:
    tables = []
    for name, variable in (("confirmed", VariableKind.CONFIRMED),
                           ("deaths", VariableKind.DEATHS),
                           ("recovered", VariableKind.RECOVERED)):
        path = directory / f"{name}.csv"
        if path.exists():
            tables.append(parse_timeseries_csv(path.read_bytes(), variable))
    populations = parse_population_csv((directory / "population.csv").read_bytes())
    return build_dataset(tables, populations)


@pytest.fixture(scope="session")
def jhu_dataset(jhu_dir) -> Dataset:
    return load_jhu_dataset(jhu_dir)


def table_from_rows(variable: VariableKind, calendar: Calendar,
                    rows: list[tuple[Region, list[int]]]) -> ParsedTable:
    return ParsedTable(
        variable=variable,
        calendar=calendar,
        rows=[(region, np.asarray(values, dtype=np.int64))
              for region, values in rows],
    )


def country(name: str, lat: float, lon: float) -> Region:
    region_id = RegionId(name)
    return Region(id=region_id, display_name=name.title(),
                  level=Level.COUNTRY, anchor=LatLon(lat, lon))


def random_dataset(seed: int, n_regions: int = 10, n_days: int = 64,
                   variables: tuple[VariableKind, ...] = (
                       VariableKind.CONFIRMED, VariableKind.DEATHS,
                       VariableKind.RECOVERED),
                   with_population: bool = True) -> Dataset:
    """Synthetic country-level dataset with monotone random series."""
    rng = random.Random(seed)
    calendar = Calendar(EPOCH, n_days)
    regions = [country(f"land{i:02d}",
                       rng.uniform(-60, 60), rng.uniform(-170, 170))
               for i in range(n_regions)]
    tables = []
    for variable in variables:
        rows = []
        for region in regions:
            increments = [rng.randrange(0, 20) for _ in range(n_days)]
            rows.append((region, list(np.cumsum(increments))))
        tables.append(table_from_rows(variable, calendar, rows))
    populations = None
    if with_population:
        populations = {region.id: rng.randrange(10_000, 5_000_000)
                       for region in regions}
    return build_dataset(tables, populations)
