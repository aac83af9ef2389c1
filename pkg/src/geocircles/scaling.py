"""Value-to-radius laws for geocircles: linear, logarithmic, Flannery."""

from __future__ import annotations

import math
from typing import Iterable

from .errors import AllZero, InvalidSpec
from .model import ScalingMethod, ScalingSpec

# Flannery's perceptual compensation exponent for proportional circles.
FLANNERY_EXPONENT = 0.57


def radius(value: float, spec: ScalingSpec) -> float:
    """Pixel radius for a value; exactly 0 for value 0, clamped otherwise."""
    if not isinstance(spec, ScalingSpec):
        raise InvalidSpec(f"not a ScalingSpec: {spec!r}")
    if value < 0:
        raise ValueError(f"value must be >= 0, got {value}")
    if value == 0:
        return 0.0
    u = value / spec.reference_value
    if spec.method is ScalingMethod.LINEAR:
        f = u
    elif spec.method is ScalingMethod.LOG:
        f = math.log10(1.0 + u)
    else:
        f = u ** FLANNERY_EXPONENT
    unclamped = spec.user_factor * spec.base_radius_px * f
    return min(max(unclamped, spec.r_min_px), spec.r_max_px)


def fit_reference(values: Iterable[float]) -> float:
    """Per-frame reference: the maximum value, so the largest circle renders
    at base_radius_px times the user factor."""
    best = None
    for value in values:
        if value > 0 and (best is None or value > best):
            best = value
    if best is None:
        raise AllZero("no positive values to fit a reference to")
    return float(best)
