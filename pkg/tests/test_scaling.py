"""Radius laws: zero handling, Flannery power law, clamps, reference fitting."""

from __future__ import annotations

import math
import random

import pytest

from geocircles.errors import AllZero
from geocircles.model import ScalingMethod, ScalingSpec
from geocircles.scaling import FLANNERY_EXPONENT, fit_reference, radius

WIDE = {"r_min_px": 1e-12, "r_max_px": 1e12}


def wide_spec(method: ScalingMethod, base=1.0, reference=1.0, factor=1.0):
    return ScalingSpec(method=method, base_radius_px=base,
                       reference_value=reference, user_factor=factor, **WIDE)


class TestRadius:
    @pytest.mark.parametrize("method", list(ScalingMethod))
    def test_zero_value_is_exactly_zero(self, method):
        spec = ScalingSpec(method=method)
        assert radius(0, spec) == 0.0

    def test_flannery_identity_at_reference(self):
        spec = wide_spec(ScalingMethod.FLANNERY, base=40.0, reference=123.0)
        assert radius(123.0, spec) == pytest.approx(40.0, rel=1e-12)

    def test_flannery_against_high_precision_oracle(self):
        import mpmath
        mpmath.mp.dps = 50
        expected = float(mpmath.power(1000, mpmath.mpf("0.57")))
        got = radius(1000, wide_spec(ScalingMethod.FLANNERY))
        assert abs(got - expected) / expected < 1e-6
        assert got == pytest.approx(51.286, abs=5e-4)

    def test_linear_is_directly_proportional(self):
        spec = wide_spec(ScalingMethod.LINEAR, base=3.0, reference=10.0)
        assert radius(20.0, spec) == pytest.approx(6.0)
        rng = random.Random(3)
        for _ in range(100):
            v = rng.uniform(0.01, 1e6)
            assert radius(2 * v, spec) == pytest.approx(2 * radius(v, spec), rel=1e-12)

    def test_log_formula(self):
        spec = wide_spec(ScalingMethod.LOG, base=7.0, reference=2.0)
        assert radius(18.0, spec) == pytest.approx(7.0 * math.log10(1 + 9.0))

    def test_log_continuous_at_zero(self):
        spec = wide_spec(ScalingMethod.LOG)
        assert radius(1e-15, spec) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("method", list(ScalingMethod))
    def test_monotone(self, method):
        spec = wide_spec(method, base=5.0, reference=100.0)
        rng = random.Random(17)
        values = sorted(rng.uniform(0, 1e4) for _ in range(200))
        radii = [radius(v, spec) for v in values]
        for a, b in zip(radii, radii[1:]):
            assert a <= b

    def test_clamps(self):
        spec = ScalingSpec(method=ScalingMethod.LINEAR, base_radius_px=10.0,
                           reference_value=100.0, r_min_px=2.0, r_max_px=120.0)
        assert radius(0.001, spec) == 2.0       # visibility floor for nonzero
        assert radius(1e9, spec) == 120.0       # occlusion ceiling
        assert radius(0, spec) == 0.0           # zero stays zero, not r_min

    def test_user_factor_scales_unclamped_radius(self):
        base = wide_spec(ScalingMethod.FLANNERY, base=10.0, reference=50.0)
        boosted = wide_spec(ScalingMethod.FLANNERY, base=10.0, reference=50.0,
                            factor=8.0)
        assert radius(30.0, boosted) == pytest.approx(8.0 * radius(30.0, base))

    def test_negative_value_rejected(self):
        with pytest.raises(ValueError):
            radius(-1, ScalingSpec())

    def test_flannery_power_law_ratio(self):
        spec = wide_spec(ScalingMethod.FLANNERY, base=11.0, reference=77.0)
        rng = random.Random(23)
        for _ in range(200):
            v, w = rng.uniform(0.01, 1e5), rng.uniform(0.01, 1e5)
            ratio = radius(v, spec) / radius(w, spec)
            assert ratio == pytest.approx((v / w) ** FLANNERY_EXPONENT, rel=1e-9)


class TestFitReference:
    def test_max_by_definition(self):
        assert fit_reference([3, 9, 27]) == 27

    def test_singleton(self):
        assert fit_reference([5]) == 5

    def test_all_equal_gives_equal_radii(self):
        reference = fit_reference([4.0, 4.0, 4.0])
        spec = wide_spec(ScalingMethod.FLANNERY, base=20.0, reference=reference)
        radii = {radius(4.0, spec) for _ in range(3)}
        assert radii == {20.0}

    def test_all_zero(self):
        with pytest.raises(AllZero):
            fit_reference([0, 0, 0])
        with pytest.raises(AllZero):
            fit_reference([])

    def test_ignores_zeros(self):
        assert fit_reference([0, 2, 0]) == 2
