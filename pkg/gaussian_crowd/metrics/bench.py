"""
Frame-time benchmark over (gaussian count x character count x motion) cells.

Each cell builds a crowd of single-level synthetic templates, renders warm-up frames,
then times a fixed number of frames and reports per-stage medians.
"""

import math
import statistics
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import psutil

from gaussian_crowd.avatar.skeleton import MotionClip
from gaussian_crowd.avatar.synthetic import generate_synthetic_motion, generate_synthetic_template
from gaussian_crowd.avatar.template import AvatarTemplate
from gaussian_crowd.config import BENCH_MEMORY_BUDGET_FRACTION
from gaussian_crowd.constants import (
    BENCH_DEFAULT_GAUSSIANS,
    BENCH_SIMULATION_FPS,
    BENCH_TIMED_FRAMES,
    BENCH_WARMUP_FRAMES,
    MIB,
    REFERENCE_TEMPLATE_COUNT,
)
from gaussian_crowd.core.camera import Camera, camera_from_config
from gaussian_crowd.crowd.builder import build_crowd
from gaussian_crowd.crowd.memory import CrowdCensus, memory_report
from gaussian_crowd.errors import ConfigError
from gaussian_crowd.logger_config import get_crowd_logger, log_bench_cell, log_cell_skipped
from gaussian_crowd.renderer.pipeline import render_frame_timed
from gaussian_crowd.renderer.splats import RenderSettings
from gaussian_crowd.types import (
    BenchMatrix,
    BenchReport,
    BenchTable,
    CellStatus,
    CrowdConfig,
    GridConfig,
    RenderMode,
    SceneConfig,
    StageTimings,
)

logger = get_crowd_logger(__name__)

# Transient per-splat working set of gather, sort and raster (bytes, generous)
SPLAT_WORKING_BYTES = 256

# FPS on an RTX 4090 at 1280x720; None marks cells that did not fit in memory
REFERENCE_FPS_TABLE: Dict[str, Dict[int, Optional[float]]] = {
    "202,738 (w/o motion)": {1: 728.0, 100: 50.0, 400: 22.2, 1000: None, 5000: None},
    "202,738 (w/ motion)": {1: 617.0, 100: 18.2, 400: None, 1000: None, 5000: None},
    "12,661 (w/o motion)": {1: 1612.0, 100: 586.0, 400: 251.0, 1000: 125.0, 5000: 10.3},
    "12,661 (w/ motion)": {1: 1370.0, 100: 312.0, 400: 76.0, 1000: 34.0, 5000: 6.1},
    "3,176 (w/o motion)": {1: 1703.0, 100: 1240.0, 400: 673.0, 1000: 275.0, 5000: 38.6},
    "3,176 (w/ motion)": {1: 1347.0, 100: 804.0, 400: 298.0, 1000: 121.0, 5000: 23.2},
}

_MOTION_WORDS = {"on": True, "true": True, "yes": True, "off": False, "false": False, "no": False}


def scenario_label(gaussian_count: int, motion: bool) -> str:
    return f"{gaussian_count:,} ({'w/' if motion else 'w/o'} motion)"


def reference_fps(scenario: str, instance_count: int) -> Optional[float]:
    """Measured FPS for a cell from REFERENCE_FPS_TABLE, None if absent or out of memory"""
    return REFERENCE_FPS_TABLE.get(scenario, {}).get(instance_count)


def parse_matrix(text: str) -> BenchMatrix:
    """Parse "chars=1,100;motion=on,off;gaussians=3176" (gaussians and motion optional)"""
    values: Dict[str, List[str]] = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        key, sep, raw = part.partition("=")
        if not sep:
            raise ConfigError(f"matrix entry '{part}' is not key=value")
        values[key.strip()] = [v.strip() for v in raw.split(",") if v.strip()]

    unknown = set(values) - {"chars", "motion", "gaussians"}
    if unknown:
        raise ConfigError(f"unknown matrix keys: {', '.join(sorted(unknown))}")
    if "chars" not in values:
        raise ConfigError("matrix needs a chars=... entry")
    try:
        chars = [int(v) for v in values["chars"]]
        gaussians = [int(v) for v in values.get("gaussians", [str(g) for g in BENCH_DEFAULT_GAUSSIANS])]
        motions = [_MOTION_WORDS[v.lower()] for v in values.get("motion", ["off", "on"])]
        return BenchMatrix(character_counts=chars, motion_flags=motions, gaussian_counts=gaussians)
    except (ValueError, KeyError) as e:
        raise ConfigError(f"invalid matrix '{text}': {e}") from e


@dataclass
class BenchScene:
    """Scene prototype a benchmark cell is derived from"""

    scene: SceneConfig
    motions: Sequence[MotionClip] = field(default_factory=list)
    template_count: int = 1
    settings: RenderSettings = field(default_factory=RenderSettings)
    warmup_frames: int = BENCH_WARMUP_FRAMES
    timed_frames: int = BENCH_TIMED_FRAMES

    def __post_init__(self):
        if not self.motions:
            self.motions = [generate_synthetic_motion(seed) for seed in range(2)]
        self.template_count = max(1, min(self.template_count, REFERENCE_TEMPLATE_COUNT))

    @property
    def camera(self) -> Camera:
        return camera_from_config(self.scene.camera)

    def cell_scene(self, characters: int) -> SceneConfig:
        cols = self.scene.grid.cols
        grid = GridConfig(
            rows=max(self.scene.grid.rows, math.ceil(characters / cols)),
            cols=cols,
            spacing_m=self.scene.grid.spacing_m,
            origin_z_m=self.scene.grid.origin_z_m,
        )
        crowd = CrowdConfig(count=characters, seed=self.scene.crowd.seed)
        return self.scene.model_copy(update={"grid": grid, "crowd": crowd})


def estimate_cell_bytes(gaussian_count: int, characters: int, template_count: int) -> int:
    census = CrowdCensus.uniform(gaussian_count, characters, template_count)
    resident = memory_report(census).shared_bytes
    return resident + characters * gaussian_count * SPLAT_WORKING_BYTES


def _skipped(gaussians: int, characters: int, motion: bool, reason: str) -> BenchReport:
    log_cell_skipped(logger, scenario_label(gaussians, motion), characters, reason)
    return BenchReport(
        scenario=scenario_label(gaussians, motion),
        gaussian_count=gaussians,
        instance_count=characters,
        motion=motion,
        status=CellStatus.SKIPPED,
        skip_reason=reason,
        total_splats=gaussians * characters,
    )


def run_cell(
    prototype: BenchScene,
    templates: Sequence[AvatarTemplate],
    gaussians: int,
    characters: int,
    motion: bool,
) -> BenchReport:
    crowd = build_crowd(prototype.cell_scene(characters), templates, prototype.motions)
    camera = prototype.camera
    mode = RenderMode.ANIMATED if motion else RenderMode.STATIC

    samples: List[StageTimings] = []
    result = None
    for frame in range(prototype.warmup_frames + prototype.timed_frames):
        result = render_frame_timed(
            crowd, camera, frame / BENCH_SIMULATION_FPS, prototype.settings, mode, lod_override=0
        )
        if frame >= prototype.warmup_frames:
            samples.append(result.timings)

    stages = StageTimings(
        update_ms=statistics.median(s.update_ms for s in samples),
        gather_ms=statistics.median(s.gather_ms for s in samples),
        sort_ms=statistics.median(s.sort_ms for s in samples),
        rasterize_ms=statistics.median(s.rasterize_ms for s in samples),
    )
    total_ms = stages.total_ms
    report = BenchReport(
        scenario=scenario_label(gaussians, motion),
        gaussian_count=gaussians,
        instance_count=characters,
        motion=motion,
        stages=stages,
        total_ms=total_ms,
        fps=1000.0 / total_ms if total_ms > 0.0 else 0.0,
        total_splats=result.total_splats,
        surviving_splats=result.surviving_splats,
    )
    log_bench_cell(logger, report.scenario, characters, report.total_splats, report.fps)
    return report


def run_benchmark(
    matrix: BenchMatrix,
    prototype: BenchScene,
    memory_budget_fraction: float = BENCH_MEMORY_BUDGET_FRACTION,
) -> BenchTable:
    """Run every cell; cells that would not fit in memory become skipped rows"""
    if prototype.timed_frames < 1:
        raise ConfigError("a benchmark needs at least one timed frame")
    table = BenchTable()
    for gaussians in matrix.gaussian_counts:
        templates = [
            generate_synthetic_template(seed, [gaussians], template_id=f"bench_{gaussians}_{seed:02d}")
            for seed in range(prototype.template_count)
        ]
        for motion in matrix.motion_flags:
            for characters in matrix.character_counts:
                needed = estimate_cell_bytes(gaussians, characters, prototype.template_count)
                budget = memory_budget_fraction * psutil.virtual_memory().available
                if needed > budget:
                    table.reports.append(
                        _skipped(
                            gaussians,
                            characters,
                            motion,
                            f"needs ~{needed / MIB:.0f} MiB, budget {budget / MIB:.0f} MiB",
                        )
                    )
                    continue
                try:
                    table.reports.append(run_cell(prototype, templates, gaussians, characters, motion))
                except MemoryError:
                    table.reports.append(_skipped(gaussians, characters, motion, "out of memory"))
    return table
