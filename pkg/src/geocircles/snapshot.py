"""Versioned columnar snapshot of an ingested dataset.

One .npz holds a JSON metadata blob plus, per variable, a 2D int64 value
matrix and a row-index array into the metadata's region list. The schema
version is embedded; newer snapshots are refused.
"""

from __future__ import annotations

import datetime as dt
import json
from pathlib import Path
from typing import Union

import numpy as np

from .errors import SnapshotTooNew
from .ingest import Dataset, IngestReport, content_hash
from .model import (
    Calendar,
    DailySeries,
    LatLon,
    Level,
    Region,
    RegionId,
    VariableKind,
)

SCHEMA_VERSION = 1
SNAPSHOT_FILENAME = "dataset.npz"
REPORT_FILENAME = "report.json"


def _region_meta(region: Region) -> dict:
    meta = {
        "path": region.id.path,
        "display_name": region.display_name,
        "level": region.level.value,
        "lat": region.anchor.lat if region.anchor else None,
        "lon": region.anchor.lon if region.anchor else None,
        "population": region.population,
    }
    if region.boundary is not None:
        meta["boundary"] = [[p.lat, p.lon] for p in region.boundary]
    return meta


def _region_from_meta(meta: dict) -> Region:
    region_id = RegionId.from_path(meta["path"])
    anchor = None
    if meta["lat"] is not None and meta["lon"] is not None:
        anchor = LatLon(meta["lat"], meta["lon"])
    boundary = None
    if meta.get("boundary"):
        boundary = tuple(LatLon(lat, lon) for lat, lon in meta["boundary"])
    return Region(
        id=region_id,
        display_name=meta["display_name"],
        level=Level(meta["level"]),
        anchor=anchor,
        population=meta["population"],
        boundary=boundary,
    )


def save_snapshot(dataset: Dataset, directory: Union[str, Path]) -> Path:
    """Write dataset.npz (+ report.json) into a directory; returns the npz path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    region_ids = sorted(dataset.regions)
    index = {region_id: i for i, region_id in enumerate(region_ids)}

    arrays: dict[str, np.ndarray] = {}
    for variable in VariableKind:
        keyed = [(index[rid], rid) for (rid, var) in dataset.series if var is variable]
        if not keyed:
            continue
        keyed.sort()
        rows = np.array([i for i, _ in keyed], dtype=np.int32)
        values = np.stack([dataset.series[(rid, variable)].cumulative
                           for _, rid in keyed])
        arrays[f"rows_{variable.value}"] = rows
        arrays[f"values_{variable.value}"] = values

    meta = {
        "schema_version": SCHEMA_VERSION,
        "epoch": dataset.calendar.epoch.isoformat(),
        "n_days": dataset.calendar.n_days,
        "regions": [_region_meta(dataset.regions[rid]) for rid in region_ids],
        "synthesized": sorted(rid.path for rid in dataset.synthesized),
        "report": dataset.report.to_dict(),
    }
    path = directory / SNAPSHOT_FILENAME
    np.savez_compressed(path, meta=np.array(json.dumps(meta)), **arrays)
    (directory / REPORT_FILENAME).write_text(
        json.dumps(dataset.report.to_dict(), indent=2) + "\n")
    return path


def load_snapshot(source: Union[str, Path]) -> Dataset:
    """Load a snapshot written by save_snapshot; refuses newer schemas."""
    source = Path(source)
    if source.is_dir():
        source = source / SNAPSHOT_FILENAME
    if not source.exists():
        raise FileNotFoundError(f"no snapshot at {source}")
    with np.load(source, allow_pickle=False) as bundle:
        meta = json.loads(str(bundle["meta"]))
        if meta["schema_version"] > SCHEMA_VERSION:
            raise SnapshotTooNew(
                f"snapshot schema {meta['schema_version']} > supported {SCHEMA_VERSION}")
        calendar = Calendar(dt.date.fromisoformat(meta["epoch"]), meta["n_days"])
        regions = {}
        ordered_ids = []
        for region_meta in meta["regions"]:
            region = _region_from_meta(region_meta)
            regions[region.id] = region
            ordered_ids.append(region.id)

        series = {}
        for variable in VariableKind:
            rows_key = f"rows_{variable.value}"
            if rows_key not in bundle:
                continue
            rows = bundle[rows_key]
            values = bundle[f"values_{variable.value}"]
            for row_index, row_values in zip(rows, values):
                region_id = ordered_ids[int(row_index)]
                series[(region_id, variable)] = DailySeries(
                    region_id, variable, row_values)

    children: dict[RegionId, list[RegionId]] = {}
    for region_id in regions:
        parent = region_id.parent()
        if parent is not None and parent in regions:
            children.setdefault(parent, []).append(region_id)

    report_dict = meta["report"]
    report = IngestReport(
        rows=report_dict["rows"],
        regions=report_dict["regions"],
        adjusted_cells=report_dict["adjusted_cells"],
        anchorless=report_dict["anchorless"],
        date_range=tuple(report_dict["date_range"]),
        variables=tuple(report_dict["variables"]),
        incidence_available=report_dict["incidence_available"],
    )
    return Dataset(
        calendar=calendar,
        regions=regions,
        series=series,
        children={parent: tuple(sorted(kids))
                  for parent, kids in sorted(children.items())},
        synthesized=frozenset(RegionId.from_path(p) for p in meta["synthesized"]),
        report=report,
        version=content_hash(calendar, regions, series),
    )
