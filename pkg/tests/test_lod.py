"""
Tests for distance-based LoD selection
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussian_crowd.errors import InvalidInputError
from gaussian_crowd.lod import LodPolicy, instance_distance, select_lod
from gaussian_crowd.types import LodConfig


def _interval_oracle(distance: float, thresholds) -> int:
    if distance < thresholds[0]:
        return 0
    if distance < thresholds[1]:
        return 1
    return 2


class TestSelectLod:
    """Half-open intervals [0, 5) -> 0, [5, 10) -> 1, [10, inf) -> 2"""

    @pytest.fixture
    def policy(self):
        return LodPolicy((5.0, 10.0))

    @pytest.mark.parametrize(
        "distance,expected", [(0.0, 0), (4.9, 0), (5.0, 1), (7.0, 1), (9.999, 1), (10.0, 2), (12.0, 2)]
    )
    def test_reference_distances(self, policy, distance, expected):
        assert select_lod(policy, distance) == expected

    def test_matches_interval_oracle(self, policy):
        """10,000 random distances agree with the interval definition"""
        rng = np.random.default_rng(3)
        for distance in rng.uniform(0.0, 20.0, 10_000):
            assert select_lod(policy, float(distance)) == _interval_oracle(distance, (5.0, 10.0))

    @given(st.floats(0.0, 1e6), st.floats(0.0, 1e6))
    def test_monotone(self, d1, d2):
        policy = LodPolicy()
        near, far = sorted((d1, d2))
        assert select_lod(policy, near) <= select_lod(policy, far)

    def test_hysteresis_holds_previous_level(self):
        policy = LodPolicy((5.0, 10.0), hysteresis_band=1.0)
        assert select_lod(policy, 5.3, previous_level=0) == 0
        assert select_lod(policy, 5.6, previous_level=0) == 1
        assert select_lod(policy, 4.7, previous_level=1) == 1
        assert select_lod(policy, 4.4, previous_level=1) == 0
        assert select_lod(policy, 10.3, previous_level=1) == 1
        assert select_lod(policy, 9.7, previous_level=2) == 2

    def test_hysteresis_stops_oscillation(self):
        """Jitter around a boundary never flips the level once it has settled"""
        policy = LodPolicy((5.0, 10.0), hysteresis_band=0.5)
        level = select_lod(policy, 5.1)
        for distance in (4.9, 5.1, 4.85, 5.2, 4.8):
            level = select_lod(policy, distance, previous_level=level)
            assert level == 1

    def test_no_previous_level_ignores_band(self):
        policy = LodPolicy((5.0, 10.0), hysteresis_band=1.0)
        assert select_lod(policy, 5.0) == 1

    def test_generalizes_to_more_levels(self):
        policy = LodPolicy((2.0, 4.0, 8.0))
        assert policy.level_count == 4
        assert [select_lod(policy, d) for d in (1.0, 3.0, 5.0, 9.0)] == [0, 1, 2, 3]

    @pytest.mark.parametrize("distance", [-1.0, float("nan"), float("inf")])
    def test_invalid_distance(self, distance):
        with pytest.raises(InvalidInputError):
            select_lod(LodPolicy(), distance)

    @pytest.mark.parametrize("thresholds", [(10.0, 5.0), (5.0, 5.0), (-1.0, 5.0)])
    def test_invalid_thresholds(self, thresholds):
        with pytest.raises(InvalidInputError):
            LodPolicy(thresholds)

    def test_from_config_defaults(self):
        policy = LodPolicy.from_config(LodConfig())
        assert policy.thresholds == (5.0, 10.0)
        assert policy.hysteresis_band == 0.0


class TestInstanceDistance:
    """Euclidean distance from camera to instance anchor"""

    def test_identical_points(self):
        assert instance_distance((1.0, 2.0, 3.0), (1.0, 2.0, 3.0)) == 0.0

    def test_pythagorean(self):
        assert instance_distance((0.0, 0.0, 0.0), (3.0, 4.0, 0.0)) == pytest.approx(5.0)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInputError):
            instance_distance((np.nan, 0.0, 0.0), (0.0, 0.0, 0.0))
