"""Request parsing and payload assembly shared by the HTTP API and the CLI.

Both surfaces serialize through dump_json, so a CLI query body is
byte-identical to the API response body for the same dataset version.
"""

from __future__ import annotations

import datetime as dt
import json
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Union

import numpy as np

from . import scaling, spatial
from .errors import AllZero
from .ingest import Dataset
from .model import (
    CircleSpec,
    FrameEntry,
    GeocircleFrame,
    Level,
    RateKind,
    RegionId,
    RegionValues,
    ScalingMethod,
    ScalingSpec,
    TimeWindow,
    VariableKind,
)
from .query import (
    Aggregation,
    BBox,
    Mode,
    Pyramid,
    QuerySpec,
    build_pyramid,
    cluster_rate_fn,
    evaluate_frame,
    focus_series,
    frame_dates,
    threshold_query,
)

DEFAULT_RATES = (RateKind.INCIDENCE, RateKind.MORTALITY)
DEFAULT_CLUSTER_PX = 60.0
DEFAULT_BASE_RADIUS_PX = 40.0
DEFAULT_R_MIN_PX = 2.0
DEFAULT_R_MAX_PX = 120.0

# Zoom-to-level defaults: country below 4, state through 7, county above.
STATE_ZOOM = 4
COUNTY_ZOOM = 8


@dataclass(frozen=True)
class ServiceDefaults:
    """Server-side defaults applied when a request omits a parameter.

    The CLI always uses the built-in values, so its output matches the API
    byte-for-byte whenever the server runs with an unmodified config.
    """

    scale_method: ScalingMethod = ScalingMethod.FLANNERY
    base_radius_px: float = DEFAULT_BASE_RADIUS_PX
    r_min_px: float = DEFAULT_R_MIN_PX
    r_max_px: float = DEFAULT_R_MAX_PX
    cluster_px: float = DEFAULT_CLUSTER_PX
    max_markers: Optional[int] = None

    def __post_init__(self):
        # Validate via the same rules ScalingSpec enforces.
        ScalingSpec(method=self.scale_method, base_radius_px=self.base_radius_px,
                    r_min_px=self.r_min_px, r_max_px=self.r_max_px)


BUILTIN_DEFAULTS = ServiceDefaults()


def _canonical(value):
    """Normalize a payload for serialization: enums to values, dates to ISO,
    numpy scalars to Python, and integral floats to ints so that equal values
    always serialize to equal bytes."""
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        return int(value) if value.is_integer() else value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return _canonical(float(value))
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dt.date):
        return value.isoformat()
    if isinstance(value, dict):
        return {k: _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    return value


def dump_json(payload) -> str:
    return json.dumps(_canonical(payload), separators=(",", ":"),
                      ensure_ascii=False, allow_nan=False)


class SnapshotState:
    """One immutable dataset plus lazily built spatial/pyramid indexes.

    A refresh constructs a whole new SnapshotState and swaps it in atomically,
    so concurrent readers always see one consistent version end-to-end.
    """

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self._trees: dict[Level, spatial.PRQuadtree] = {}
        self._pyramids: dict[tuple[VariableKind, Level], Pyramid] = {}
        self._lock = threading.Lock()

    @property
    def version(self) -> str:
        return self.dataset.version

    def tree_for(self, level: Level) -> spatial.PRQuadtree:
        with self._lock:
            tree = self._trees.get(level)
            if tree is None:
                anchors = [(r.id, r.anchor.lat, r.anchor.lon)
                           for r in self.dataset.regions_at(level) if r.anchor]
                tree = spatial.build_tree(anchors)
                self._trees[level] = tree
        return tree

    def pyramid_for(self, variable: VariableKind, level: Level) -> Pyramid:
        with self._lock:
            pyramid = self._pyramids.get((variable, level))
            if pyramid is None:
                pyramid = build_pyramid(self.dataset, variable, level)
                self._pyramids[(variable, level)] = pyramid
        return pyramid


def _parse_date(text: str, name: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise ValueError(f"bad {name} date {text!r}, expected YYYY-MM-DD") from None


def _parse_vars(text: Optional[str]) -> tuple[VariableKind, ...]:
    if text is None or text == "":
        return ()
    wanted = {part.strip().lower() for part in text.split(",") if part.strip()}
    known = {v.value for v in VariableKind}
    unknown = wanted - known
    if unknown:
        raise ValueError(f"unknown variables: {sorted(unknown)}")
    return tuple(v for v in VariableKind if v.value in wanted)


def _parse_rates(text: Optional[str]) -> tuple[RateKind, ...]:
    if text is None or text == "":
        return ()
    wanted = {part.strip().lower() for part in text.split(",") if part.strip()}
    known = {r.value for r in RateKind}
    unknown = wanted - known
    if unknown:
        raise ValueError(f"unknown rates: {sorted(unknown)}")
    return tuple(r for r in RateKind if r.value in wanted)


def _parse_bbox(text: Optional[str]) -> Optional[BBox]:
    if text is None or text == "":
        return None
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError("bbox must be min_lat,min_lon,max_lat,max_lon")
    try:
        numbers = [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"bad bbox {text!r}") from None
    return BBox(*numbers)


def _parse_level(text: Optional[str], zoom: int) -> Level:
    if text:
        try:
            return Level(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown level {text!r}") from None
    if zoom >= COUNTY_ZOOM:
        return Level.COUNTY
    if zoom >= STATE_ZOOM:
        return Level.STATE
    return Level.COUNTRY


def _parse_factors(text: Optional[str]) -> dict[str, float]:
    """Either one global factor ('2.0') or per-series pairs
    ('confirmed:2.0,incidence:0.5'); unlisted series default to 1.0."""
    if text is None or text == "":
        return {}
    if ":" not in text:
        return {"*": float(text)}
    factors: dict[str, float] = {}
    for pair in text.split(","):
        if not pair.strip():
            continue
        name, _, value = pair.partition(":")
        factors[name.strip().lower()] = float(value)
    return factors


@dataclass(frozen=True)
class FrameParams:
    spec: QuerySpec
    date: dt.date
    zoom: int
    cluster_px: float
    max_markers: Optional[int]
    scale_method: ScalingMethod
    factors: Mapping[str, float]
    pick_at: Optional[tuple[float, float]]
    defaults: ServiceDefaults = BUILTIN_DEFAULTS


def _parse_selection(dataset: Dataset, raw: Mapping[str, str],
                     ) -> tuple[TimeWindow, tuple, tuple]:
    calendar = dataset.calendar
    start = _parse_date(raw["start"], "start") if raw.get("start") else calendar.epoch
    end = _parse_date(raw["end"], "end") if raw.get("end") else calendar.last
    range_ = TimeWindow(calendar.day_index(start), calendar.day_index(end))
    if "vars" not in raw and "rates" not in raw:
        variables, rates = (), DEFAULT_RATES
    else:
        variables = _parse_vars(raw.get("vars"))
        rates = _parse_rates(raw.get("rates"))
    return range_, variables, rates


def parse_frame_params(dataset: Dataset, raw: Mapping[str, str],
                       defaults: ServiceDefaults = BUILTIN_DEFAULTS) -> FrameParams:
    range_, variables, rates = _parse_selection(dataset, raw)
    mode = Mode(raw.get("mode", "total").strip().lower())
    window_size = QuerySpec.resolve_window_size(raw.get("window", "max"), range_)
    zoom = int(raw.get("zoom", "0"))
    level = _parse_level(raw.get("level"), zoom)
    agg = Aggregation(raw.get("agg", "cumulative").strip().lower())
    spec = QuerySpec(
        mode=mode,
        range=range_,
        window_size=window_size,
        aggregation=agg,
        variables=variables,
        rates=rates,
        level=level,
        bbox=_parse_bbox(raw.get("bbox")),
    )
    if raw.get("date"):
        date = _parse_date(raw["date"], "date")
    else:
        date = dataset.calendar.date_at(range_.end_day)
    pick_at = None
    if "lat" in raw or "lon" in raw:
        if not ("lat" in raw and "lon" in raw):
            raise ValueError("lat and lon must be supplied together")
        lat, lon = float(raw["lat"]), float(raw["lon"])
        if not (-90 <= lat <= 90 and -180 <= lon <= 180):
            raise ValueError(f"coordinates ({lat}, {lon}) out of range")
        pick_at = (lat, lon)
    if raw.get("max_markers"):
        max_markers = int(raw["max_markers"])
    else:
        max_markers = defaults.max_markers
    if raw.get("scale_method"):
        scale_method = ScalingMethod(raw["scale_method"].strip().lower())
    else:
        scale_method = defaults.scale_method
    return FrameParams(
        spec=spec,
        date=date,
        zoom=zoom,
        cluster_px=float(raw.get("cluster_px", defaults.cluster_px)),
        max_markers=max_markers,
        scale_method=scale_method,
        factors=_parse_factors(raw.get("scale_factor")),
        pick_at=pick_at,
        defaults=defaults,
    )


def _primary_series(spec: QuerySpec) -> spatial.PrimarySeries:
    if spec.variables:
        return spec.variables[0]
    if spec.rates:
        return spec.rates[0]
    return None


def _series_factor(factors: Mapping[str, float], name: str) -> float:
    return factors.get(name, factors.get("*", 1.0))


def _scaling_spec(params: FrameParams, reference: Optional[float],
                  factor: float) -> Optional[ScalingSpec]:
    if reference is None:
        return None
    return ScalingSpec(
        method=params.scale_method,
        base_radius_px=params.defaults.base_radius_px,
        reference_value=reference,
        user_factor=factor,
        r_min_px=params.defaults.r_min_px,
        r_max_px=params.defaults.r_max_px,
    )


def _fit_or_none(values) -> Optional[float]:
    try:
        return scaling.fit_reference(values)
    except AllZero:
        return None


def _pick_region(state: SnapshotState, spec: QuerySpec,
                 values: list[RegionValues],
                 at: tuple[float, float]) -> Optional[RegionId]:
    candidates = {}
    for entry in values:
        region = state.dataset.regions[entry.region]
        candidates[entry.region] = spatial.PickCandidate(
            nonzero=not entry.all_zero, boundary=region.boundary)
    return spatial.pick(state.tree_for(spec.level), candidates, at[0], at[1])


def build_frame_payload(state: SnapshotState, raw: Mapping[str, str],
                        defaults: ServiceDefaults = BUILTIN_DEFAULTS) -> dict:
    """Full frame pipeline: evaluate -> cluster -> fit references -> radii."""
    params = parse_frame_params(state.dataset, raw, defaults)
    spec = params.spec
    window, values = evaluate_frame(state.dataset, spec, params.date)
    nodes = spatial.cluster(
        values,
        zoom=params.zoom,
        pixel_radius=params.cluster_px,
        max_markers=params.max_markers,
        primary=_primary_series(spec),
        rate_fn=cluster_rate_fn(spec.rates, spec.aggregation, window.length),
    )
    picked = None
    if params.pick_at is not None:
        picked = _pick_region(state, spec, values, params.pick_at)

    var_specs = {}
    for var in spec.variables:
        reference = _fit_or_none(n.variables[var] for n in nodes if var in n.variables)
        var_specs[var] = _scaling_spec(
            params, reference, _series_factor(params.factors, var.value))
    rate_specs = {}
    for rate in spec.rates:
        reference = _fit_or_none(n.rates[rate] for n in nodes if rate in n.rates)
        rate_specs[rate] = _scaling_spec(
            params, reference, _series_factor(params.factors, rate.value))

    entries = []
    for node in nodes:
        circles = []
        for var in spec.variables:
            if var not in node.variables:
                continue
            value = node.variables[var]
            radius_px = scaling.radius(value, var_specs[var]) if var_specs[var] else 0.0
            circles.append(CircleSpec.for_variable(var, value, radius_px))
        for rate in spec.rates:
            if rate not in node.rates:
                continue
            value = node.rates[rate]
            radius_px = scaling.radius(value, rate_specs[rate]) if rate_specs[rate] else 0.0
            circles.append(CircleSpec.for_rate(rate, value, radius_px))
        entries.append(FrameEntry(
            target=node.anchor_member.path,
            label=node.label,
            lat=node.lat,
            lon=node.lon,
            members=tuple(m.path for m in node.members),
            highlight=picked is not None and picked in node.members,
            circles=tuple(circles),
        ))
    frame = GeocircleFrame(date=params.date, window=window, entries=tuple(entries))
    return {
        "date": frame.date,
        "mode": spec.mode,
        "agg": spec.aggregation,
        "level": spec.level,
        "window": {
            "start": state.dataset.calendar.date_at(window.start_day),
            "end": state.dataset.calendar.date_at(window.end_day),
            "days": window.length,
        },
        "entries": [_entry_dict(entry) for entry in frame.entries],
    }


def _entry_dict(entry: FrameEntry) -> dict:
    return {
        "target": entry.target,
        "label": entry.label,
        "lat": entry.lat,
        "lon": entry.lon,
        "members": list(entry.members),
        "highlight": entry.highlight,
        "circles": [{
            "kind": c.kind, "name": c.name, "value": c.value,
            "radius_px": c.radius_px, "stroke": c.stroke, "color": c.color,
        } for c in entry.circles],
    }


def build_meta_payload(state: SnapshotState) -> dict:
    dataset = state.dataset
    return {
        "epoch": dataset.calendar.epoch,
        "n_days": dataset.calendar.n_days,
        "last": dataset.calendar.last,
        "variables": [v.value for v in dataset.variables_present()],
        "levels": [lv.value for lv in dataset.levels_present()],
        "incidence_available": dataset.report.incidence_available,
        "version": dataset.version,
    }


def build_regions_payload(state: SnapshotState, level_text: Optional[str],
                          prefix: str = "") -> list[dict]:
    """Region directory for pull-down menus: case-insensitive prefix match on
    display name, sorted by display name."""
    level = _parse_level(level_text, zoom=0) if level_text else None
    lowered = prefix.strip().lower()
    out = []
    for region in state.dataset.regions.values():
        if level is not None and region.level is not level:
            continue
        if lowered and not region.display_name.lower().startswith(lowered):
            continue
        out.append({
            "id": region.id.path,
            "display_name": region.display_name,
            "level": region.level.value,
            "anchor": {"lat": region.anchor.lat, "lon": region.anchor.lon}
            if region.anchor else None,
            "population": region.population,
        })
    out.sort(key=lambda r: (r["display_name"].lower(), r["id"]))
    return out


def build_series_payload(state: SnapshotState, raw: Mapping[str, str]) -> dict:
    """Focus/baseline side-by-side table. Window mode when a window size is
    given, Total mode otherwise."""
    if not raw.get("focus"):
        raise ValueError("focus region is required")
    dataset = state.dataset
    range_, variables, rates = _parse_selection(dataset, raw)
    if raw.get("window"):
        mode = Mode.WINDOW
        window_size = QuerySpec.resolve_window_size(raw["window"], range_)
    else:
        mode = Mode.TOTAL
        window_size = 1
    spec = QuerySpec(
        mode=mode,
        range=range_,
        window_size=window_size,
        aggregation=Aggregation(raw.get("agg", "cumulative").strip().lower()),
        variables=variables,
        rates=rates,
    )
    focus = RegionId.from_path(raw["focus"])
    baseline = RegionId.from_path(raw["baseline"]) if raw.get("baseline") else None
    rows = focus_series(dataset, focus, baseline, spec)
    calendar = dataset.calendar
    return {
        "focus": focus.path,
        "baseline": baseline.path if baseline else None,
        "mode": spec.mode,
        "agg": spec.aggregation,
        "window_days": spec.window_size if mode is Mode.WINDOW else None,
        "rows": [{
            "date": row.date,
            "window": {
                "start": calendar.date_at(row.window.start_day),
                "end": calendar.date_at(row.window.end_day),
            },
            "focus": row.focus,
            "baseline": row.baseline,
        } for row in rows],
    }


def build_pick_payload(state: SnapshotState, raw: Mapping[str, str],
                       defaults: ServiceDefaults = BUILTIN_DEFAULTS) -> dict:
    """Pick over the same frame the client is viewing; null when every
    displayed value is zero."""
    params = parse_frame_params(state.dataset, raw, defaults)
    if params.pick_at is None:
        raise ValueError("lat and lon are required")
    _, values = evaluate_frame(state.dataset, params.spec, params.date)
    picked = _pick_region(state, params.spec, values, params.pick_at)
    if picked is None:
        return {"region": None}
    entry = next(e for e in values if e.region == picked)
    lat, lon = params.pick_at
    return {
        "region": picked.path,
        "display_name": entry.display_name,
        "lat": entry.anchor.lat,
        "lon": entry.anchor.lon,
        "distance_km": spatial.haversine_km(lat, lon, entry.anchor.lat,
                                            entry.anchor.lon),
        "values": {var.value: value for var, value in entry.variables.items()},
        "rates": {rate.value: value for rate, value in entry.rates.items()},
    }


_METRICS: dict[str, Union[VariableKind, RateKind]] = {
    **{v.value: v for v in VariableKind},
    **{r.value: r for r in RateKind},
}


def build_threshold_payload(state: SnapshotState, raw: Mapping[str, str]) -> dict:
    metric_text = (raw.get("metric") or "").strip().lower()
    if metric_text not in _METRICS:
        raise ValueError(f"unknown metric {metric_text!r}")
    metric = _METRICS[metric_text]
    op = (raw.get("op") or "ge").strip().lower()
    if op not in ("ge", "le"):
        raise ValueError(f"op must be 'ge' or 'le', got {op!r}")
    if raw.get("value") is None:
        raise ValueError("value is required")
    value = float(raw["value"])
    dataset = state.dataset
    calendar = dataset.calendar
    start = _parse_date(raw["start"], "start") if raw.get("start") else calendar.epoch
    end = _parse_date(raw["end"], "end") if raw.get("end") else calendar.last
    temporal = TimeWindow(calendar.day_index(start), calendar.day_index(end))
    zoom = int(raw.get("zoom", "0"))
    level = _parse_level(raw.get("level"), zoom)
    pyramid = None
    if isinstance(metric, VariableKind):
        pyramid = state.pyramid_for(metric, level)
    result = threshold_query(
        dataset, pyramid, metric, op, value, level,
        _parse_bbox(raw.get("bbox")), temporal, raw.get("window", "max"))
    return {
        "metric": metric_text,
        "op": op,
        "value": value,
        "level": level.value,
        "results": [{"region": region_id.path, "dates": dates}
                    for region_id, dates in result.matches],
    }
