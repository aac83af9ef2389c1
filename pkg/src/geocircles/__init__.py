"""Spatiotemporal epidemic query engine serving animated geocircle frames."""

from .model import (
    Calendar,
    DailySeries,
    GeocircleFrame,
    LatLon,
    Level,
    RateKind,
    Region,
    RegionId,
    RegionValues,
    ScalingMethod,
    ScalingSpec,
    TimeWindow,
    VariableKind,
)

__version__ = "0.1.0"

__all__ = [
    "Calendar",
    "DailySeries",
    "GeocircleFrame",
    "LatLon",
    "Level",
    "RateKind",
    "Region",
    "RegionId",
    "RegionValues",
    "ScalingMethod",
    "ScalingSpec",
    "TimeWindow",
    "VariableKind",
    "__version__",
]
