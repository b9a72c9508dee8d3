"""
Tests for PSNR, the LoD quality sweep and the frame-time benchmark
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from pydantic import ValidationError

from gaussian_crowd.avatar.synthetic import generate_synthetic_template
from gaussian_crowd.core.camera import Camera
from gaussian_crowd.errors import ConfigError, DimensionMismatchError, InvalidCountsError
from gaussian_crowd.metrics.bench import (
    BenchScene,
    estimate_cell_bytes,
    parse_matrix,
    reference_fps,
    run_benchmark,
    scenario_label,
)
from gaussian_crowd.metrics.quality import lod_quality_sweep, psnr
from gaussian_crowd.renderer.rasterizer import Framebuffer
from gaussian_crowd.renderer.splats import RenderSettings
from gaussian_crowd.types import (
    BenchMatrix,
    BenchReport,
    CameraConfig,
    CellStatus,
    CrowdConfig,
    GridConfig,
    SceneConfig,
)


class TestPsnr:
    """Peak signal-to-noise ratio over linear RGB"""

    def test_identical_images_hit_the_cap(self):
        image = np.random.default_rng(0).uniform(0.0, 1.0, (8, 8, 3))
        assert psnr(image, image.copy()) == 99.0

    def test_black_vs_white(self):
        assert psnr(np.zeros((4, 4, 3)), np.ones((4, 4, 3))) == pytest.approx(0.0)

    def test_one_pixel_differs(self):
        """One of 100 pixels off by 1.0 in every channel gives MSE 0.01, 20 dB"""
        a = np.zeros((10, 10, 3))
        b = a.copy()
        b[3, 7] = 1.0
        assert psnr(a, b) == pytest.approx(20.0)

    def test_accepts_framebuffers(self):
        a = Framebuffer.filled(4, 2, (0.5, 0.5, 0.5))
        b = Framebuffer.filled(4, 2, (0.4, 0.5, 0.5))
        assert 0.0 < psnr(a, b) < 99.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            psnr(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))

    @given(
        arrays(np.float64, (3, 4, 3), elements=st.floats(0.0, 1.0)),
        arrays(np.float64, (3, 4, 3), elements=st.floats(0.0, 1.0)),
    )
    @settings(max_examples=50)
    def test_symmetric_and_bounded(self, a, b):
        value = psnr(a, b)
        assert value == psnr(b, a)
        assert 0.0 <= value <= 99.0


class TestLodQualitySweep:
    """PSNR of each level against the finest, per distance"""

    @pytest.fixture
    def sweep_camera(self):
        return Camera.look_at((0.0, 1.0, -3.0), (0.0, 1.0, 0.0), width=96, height=64)

    def test_table_shape(self, small_template, sweep_camera):
        table = lod_quality_sweep(small_template, camera=sweep_camera, settings=RenderSettings(thread_count=1))
        assert len(table.rows) == 12
        assert table.template_id == "small"
        assert [row.lod_level for row in table.rows[:3]] == [0, 1, 2]
        assert [row.gaussian_count for row in table.rows[:3]] == list(small_template.gaussian_counts)

    def test_finest_level_is_reference(self, small_template, sweep_camera):
        table = lod_quality_sweep(
            small_template, [1.9, 5.0], camera=sweep_camera, settings=RenderSettings(thread_count=1)
        )
        assert table.psnr(1.9, 0) == 99.0
        assert table.psnr(5.0, 0) == 99.0
        assert table.psnr(1.9, 2) < 99.0

    def test_coarse_level_improves_with_distance(self, small_template, sweep_camera):
        table = lod_quality_sweep(
            small_template, [1.9, 10.0], camera=sweep_camera, settings=RenderSettings(thread_count=1)
        )
        assert table.psnr(10.0, 2) > table.psnr(1.9, 2)

    def test_single_level_template_rejected(self, sweep_camera):
        template = generate_synthetic_template(0, (50,))
        with pytest.raises(InvalidCountsError):
            lod_quality_sweep(template, camera=sweep_camera)

    @pytest.mark.slow
    def test_trend_at_scaled_counts(self):
        """A tenth of the reference counts at 640x360: coarser is worse, farther narrows the gap"""
        template = generate_synthetic_template(0, (20273, 1266, 317))
        camera = Camera.look_at((0.0, 1.0, -3.0), (0.0, 1.0, 0.0), width=640, height=360)
        table = lod_quality_sweep(template, camera=camera)
        for distance in (1.9, 3.0, 5.0, 10.0):
            assert table.psnr(distance, 0) == 99.0
            assert table.psnr(distance, 2) < table.psnr(distance, 0)
        coarse = [table.psnr(d, 2) for d in (1.9, 3.0, 5.0, 10.0)]
        assert all(b >= a - 0.1 for a, b in zip(coarse, coarse[1:]))
        assert table.psnr(10.0, 1) > table.psnr(1.9, 1)
        gap_near = table.psnr(1.9, 1) - table.psnr(1.9, 2)
        gap_far = table.psnr(10.0, 1) - table.psnr(10.0, 2)
        assert gap_far <= 0.5 * gap_near


class TestParseMatrix:
    """chars=...;motion=...;gaussians=..."""

    def test_default_matrix(self):
        matrix = parse_matrix("chars=1,100;motion=off,on")
        assert matrix.character_counts == [1, 100]
        assert matrix.motion_flags == [False, True]
        assert matrix.gaussian_counts == [3176]

    def test_optional_keys(self):
        matrix = parse_matrix(" gaussians=12661,3176 ; chars=5 ")
        assert matrix.gaussian_counts == [12661, 3176]
        assert matrix.motion_flags == [False, True]

    @pytest.mark.parametrize(
        "text", ["motion=on", "chars", "chars=1;bogus=2", "chars=x", "chars=1;motion=maybe", "chars=0"]
    )
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_matrix(text)

    def test_scenario_label(self):
        assert scenario_label(3176, False) == "3,176 (w/o motion)"
        assert scenario_label(202738, True) == "202,738 (w/ motion)"

    def test_reference_fps_lookup(self):
        assert reference_fps(scenario_label(3176, False), 100) == 1240.0
        assert reference_fps(scenario_label(202738, True), 400) is None
        assert reference_fps("40 (w/ motion)", 3) is None


class TestBenchmark:
    """Cells run, time and skip"""

    @pytest.fixture
    def prototype(self):
        scene = SceneConfig(
            templates=["unused.gsat"],
            motions=["unused.gsmo"],
            grid=GridConfig(rows=2, cols=2),
            crowd=CrowdConfig(count=1, seed=5),
            camera=CameraConfig(width=64, height=36),
        )
        return BenchScene(
            scene=scene,
            settings=RenderSettings(thread_count=1),
            warmup_frames=0,
            timed_frames=2,
        )

    def test_every_cell_reported(self, prototype):
        matrix = BenchMatrix(character_counts=[1, 3], motion_flags=[False, True], gaussian_counts=[50])
        table = run_benchmark(matrix, prototype, memory_budget_fraction=0.9)
        assert len(table.reports) == 4
        assert [r.scenario for r in table.reports] == ["50 (w/o motion)"] * 2 + ["50 (w/ motion)"] * 2
        assert [r.instance_count for r in table.reports] == [1, 3, 1, 3]
        for report in table.reports:
            assert report.status == CellStatus.OK
            assert report.total_splats == 50 * report.instance_count
            assert report.surviving_splats <= report.total_splats
            assert report.total_ms == pytest.approx(report.stages.total_ms)
            assert report.fps == pytest.approx(1000.0 / report.total_ms)

    def test_cells_over_budget_are_skipped(self, prototype):
        matrix = BenchMatrix(character_counts=[2], motion_flags=[True], gaussian_counts=[50])
        table = run_benchmark(matrix, prototype, memory_budget_fraction=1e-12)
        (report,) = table.reports
        assert report.status == CellStatus.SKIPPED
        assert "MiB" in report.skip_reason
        assert report.fps == 0.0

    def test_needs_timed_frames(self, prototype):
        prototype.timed_frames = 0
        with pytest.raises(ConfigError):
            run_benchmark(BenchMatrix(character_counts=[1]), prototype)

    @pytest.mark.slow
    def test_frame_time_scaling(self):
        """Frame time grows no faster than linearly in surviving splats; skinning costs time"""
        scene = SceneConfig(
            templates=["unused.gsat"],
            motions=["unused.gsmo"],
            grid=GridConfig(rows=20, cols=20),
            crowd=CrowdConfig(count=1, seed=7),
            camera=CameraConfig(position=(0.0, 1.6, -3.0), look_at=(0.0, 1.0, 0.0)),
        )
        prototype = BenchScene(scene=scene, warmup_frames=2, timed_frames=10)
        matrix = BenchMatrix(character_counts=[1, 100, 400], motion_flags=[False, True], gaussian_counts=[3176])
        table = run_benchmark(matrix, prototype)
        cells = {(r.motion, r.instance_count): r for r in table.reports}
        assert all(r.status == CellStatus.OK for r in table.reports)

        for motion in (False, True):
            small, large = cells[(motion, 100)], cells[(motion, 400)]
            splat_ratio = large.surviving_splats / small.surviving_splats
            assert large.total_ms / small.total_ms <= 1.3 * splat_ratio
        for characters in (100, 400):
            assert cells[(True, characters)].stages.update_ms >= cells[(False, characters)].stages.update_ms
            assert cells[(True, characters)].total_ms >= cells[(False, characters)].total_ms

    def test_estimate_grows_with_characters(self):
        assert estimate_cell_bytes(3176, 100, 14) < estimate_cell_bytes(3176, 1000, 14)

    def test_fps_must_match_total(self):
        with pytest.raises(ValidationError):
            BenchReport(
                scenario="x", gaussian_count=1, instance_count=1, motion=False, total_ms=10.0, fps=50.0
            )
        report = BenchReport(
            scenario="x", gaussian_count=1, instance_count=1, motion=False, total_ms=10.0, fps=100.0
        )
        assert report.fps == 100.0
