"""
Tests for the naive vs shared-attribute instancing memory model
"""

import pytest

from gaussian_crowd.constants import MIB
from gaussian_crowd.core.camera import Camera
from gaussian_crowd.crowd.animation import update_crowd
from gaussian_crowd.crowd.builder import Crowd
from gaussian_crowd.crowd.memory import (
    REFERENCE_MEMORY_TABLE_MIB,
    CrowdCensus,
    MemoryLayoutModel,
    fit_memory_row,
    fit_reference_row,
    memory_grid,
    memory_report,
)
from gaussian_crowd.errors import InvalidInputError
from gaussian_crowd.types import MemoryMode

N = 1000


class TestMemoryReport:
    """Byte-exact accounting per channel"""

    def test_layout_constants(self):
        model = MemoryLayoutModel()
        assert model.resident_bytes_per_gaussian == 80
        assert model.posed_mean_bytes == 12

    def test_hundred_instances(self):
        report = memory_report(CrowdCensus.uniform(N, 100))
        assert report.naive_bytes == 100 * 80 * N
        assert report.shared_bytes == 80 * N + 100 * 12 * N
        assert report.savings_fraction == pytest.approx(1.0 - (80 + 1200) / 8000)
        assert report.savings_fraction == pytest.approx(0.84)

    def test_single_instance_is_stored_unshared(self):
        """One character keeps its own copy, so both layouts cost the same"""
        report = memory_report(CrowdCensus.uniform(N, 1))
        assert report.naive_bytes == report.shared_bytes == 80 * N
        assert report.redundant_canonical_bytes == 12 * N
        assert report.savings_fraction == 0.0

    def test_overhead_is_added_to_both(self):
        model = MemoryLayoutModel(fixed_overhead_bytes=5000)
        report = memory_report(CrowdCensus.uniform(N, 10), model)
        assert report.naive_bytes == 5000 + 10 * 80 * N
        assert report.shared_bytes == 5000 + 80 * N + 10 * 12 * N
        assert report.fixed_overhead_bytes == 5000

    def test_marginal_ratio(self):
        report = memory_report(CrowdCensus.uniform(N, 50))
        assert report.shared_marginal_bytes / report.naive_marginal_bytes == pytest.approx(0.15, abs=1e-12)

    def test_breakdown_sums_to_totals(self):
        report = memory_report(CrowdCensus.uniform(N, 7, template_count=3))
        assert sum(c.naive for c in report.breakdown.values()) == report.naive_bytes
        assert sum(c.shared for c in report.breakdown.values()) == report.shared_bytes
        assert report.breakdown["posed_mean"].naive == 0

    def test_shared_never_exceeds_naive(self):
        for characters in (0, 1, 2, 13, 100):
            for templates in (1, 3, 14):
                report = memory_report(CrowdCensus.uniform(3176, characters, templates))
                assert report.shared_bytes <= report.naive_bytes

    def test_empty_census(self):
        report = memory_report(CrowdCensus.uniform(N, 0), MemoryLayoutModel(fixed_overhead_bytes=64))
        assert report.naive_bytes == report.shared_bytes == 64
        assert report.savings_fraction == 0.0

    def test_census_from_crowd_follows_active_lod(self, small_template):
        crowd = Crowd.single(small_template)
        update_crowd(crowd, Camera.look_at((0.0, 0.95, -12.0), (0.0, 0.95, 0.0)), 0.0, threads=1)
        census = CrowdCensus.from_crowd(crowd)
        assert census.residents == {("small", 2): (small_template.gaussian_counts[2], 1)}

    def test_invalid_model(self):
        with pytest.raises(InvalidInputError):
            MemoryLayoutModel(fixed_overhead_bytes=-1)


class TestMemoryGrid:
    """Table-shaped MiB grid"""

    def test_paired_rows(self):
        grid = memory_grid()
        assert [row.label for row in grid.rows] == ["202,738", "202,738", "12,661", "12,661", "3,176", "3,176"]
        assert [row.mode for row in grid.rows[:2]] == [MemoryMode.NAIVE, MemoryMode.SHARED]
        for naive, shared in zip(grid.rows[::2], grid.rows[1::2]):
            for n in grid.character_counts:
                assert shared.mib_by_characters[n] <= naive.mib_by_characters[n]

    def test_single_mode(self):
        grid = memory_grid(mode=MemoryMode.SHARED)
        assert {row.mode for row in grid.rows} == {MemoryMode.SHARED}
        assert len(grid.rows) == 3

    def test_zero_characters_is_overhead_only(self):
        grid = memory_grid([3176], [0], MemoryLayoutModel.with_overhead_mib(500.0))
        assert all(row.mib_by_characters[0] == pytest.approx(500.0) for row in grid.rows)

    def test_marginal_slope_ratio(self):
        """Between any two crowd sizes, shared grows 12/80 as fast as naive"""
        grid = memory_grid([12661], [1000, 5000])
        naive, shared = grid.rows
        ratio = (shared.mib_by_characters[5000] - shared.mib_by_characters[1000]) / (
            naive.mib_by_characters[5000] - naive.mib_by_characters[1000]
        )
        assert ratio == pytest.approx(0.15, rel=1e-12)

    def test_doubling_characters_doubles_marginal(self):
        model = MemoryLayoutModel(fixed_overhead_bytes=123)
        r1 = memory_report(CrowdCensus.uniform(N, 200), model)
        r2 = memory_report(CrowdCensus.uniform(N, 400), model)
        assert r2.naive_bytes - 123 == 2 * (r1.naive_bytes - 123)
        assert r2.breakdown["posed_mean"].shared == 2 * r1.breakdown["posed_mean"].shared

    def test_table_rows(self):
        grid = memory_grid([3176], [1, 100])
        assert grid.table_header() == ["gaussians", "mode", "chars_1", "chars_100"]
        assert grid.table_rows()[0][:2] == ["3,176", "naive"]
        assert grid.table_rows()[0][2] == pytest.approx(80 * 3176 / MIB)


class TestMemoryFit:
    """Affine fits of measured rows"""

    def test_reference_marginals(self):
        naive = fit_reference_row(12661, MemoryMode.NAIVE)
        shared = fit_reference_row(12661, MemoryMode.SHARED)
        assert naive.marginal_mib == pytest.approx(4.2, abs=0.1)
        assert shared.marginal_mib == pytest.approx(3.8, abs=0.1)
        assert naive.predict(1) == pytest.approx(567.0)
        assert shared.predict(5000) == pytest.approx(19625.0)

    def test_fitted_ratio_at_large_crowds(self):
        """Shared totals stay 5 to 15 percent below naive from 1,000 to 5,000 characters"""
        naive = fit_reference_row(12661, MemoryMode.NAIVE)
        shared = fit_reference_row(12661, MemoryMode.SHARED)
        for characters in (1000, 2000, 5000):
            ratio = shared.predict(characters) / naive.predict(characters)
            assert 0.85 <= ratio <= 0.95

    def test_least_squares(self):
        fit = fit_memory_row([1, 2, 3], [10.0, 12.0, 14.0], method="least_squares")
        assert fit.marginal_mib == pytest.approx(2.0)
        assert fit.overhead_mib == pytest.approx(8.0)

    def test_layout_share(self):
        fit = fit_reference_row(12661, MemoryMode.SHARED)
        assert fit.layout_marginal_mib == pytest.approx(12 * 12661 / MIB)
        assert 0.0 < fit.layout_share < 1.0

    def test_every_reference_row_fits(self):
        for gaussians, mode in REFERENCE_MEMORY_TABLE_MIB:
            fit = fit_reference_row(gaussians, mode)
            assert fit.marginal_mib > 0.0

    def test_needs_two_points(self):
        with pytest.raises(InvalidInputError):
            fit_memory_row([1], [10.0])

    def test_unknown_method(self):
        with pytest.raises(InvalidInputError):
            fit_memory_row([1, 2], [1.0, 2.0], method="spline")
