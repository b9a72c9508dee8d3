import time as _clock
from dataclasses import dataclass
from typing import Optional

from gaussian_crowd.core.camera import Camera
from gaussian_crowd.crowd.animation import update_crowd
from gaussian_crowd.crowd.builder import Crowd
from gaussian_crowd.logger_config import get_crowd_logger, log_frame_rendered, log_stage_timing
from gaussian_crowd.renderer.rasterizer import Framebuffer, rasterize
from gaussian_crowd.renderer.splats import RenderSettings, gather_splats, sort_splats
from gaussian_crowd.types import RenderMode, StageTimings

logger = get_crowd_logger(__name__)


@dataclass(frozen=True, eq=False)
class FrameResult:
    framebuffer: Framebuffer
    timings: StageTimings
    total_splats: int  # Gaussians of every instance's active level
    surviving_splats: int  # after culling


def render_frame_timed(
    crowd: Crowd,
    camera: Camera,
    time: float,
    settings: Optional[RenderSettings] = None,
    mode: RenderMode = RenderMode.ANIMATED,
    lod_override: Optional[int] = None,
) -> FrameResult:
    """update_crowd -> gather_splats -> sort_splats -> rasterize, timing each stage"""
    settings = settings or RenderSettings()
    threads = settings.threads

    start = _clock.perf_counter()
    update_crowd(
        crowd,
        camera,
        time,
        mode=mode,
        lod_override=lod_override,
        threads=threads,
        blend_rotations=settings.blend_rotations,
    )
    updated = _clock.perf_counter()
    frame = gather_splats(crowd, camera, threads=threads)
    gathered = _clock.perf_counter()
    frame = sort_splats(frame)
    sorted_at = _clock.perf_counter()
    framebuffer = rasterize(frame, settings, camera.width, camera.height)
    done = _clock.perf_counter()

    timings = StageTimings(
        update_ms=(updated - start) * 1000.0,
        gather_ms=(gathered - updated) * 1000.0,
        sort_ms=(sorted_at - gathered) * 1000.0,
        rasterize_ms=(done - sorted_at) * 1000.0,
    )
    for stage in ("update", "gather", "sort", "rasterize"):
        log_stage_timing(logger, stage, getattr(timings, f"{stage}_ms"))
    log_frame_rendered(logger, time, len(crowd), len(frame), timings.total_ms)
    return FrameResult(framebuffer, timings, frame.total_count, len(frame))


def render_frame(
    crowd: Crowd,
    camera: Camera,
    time: float,
    settings: Optional[RenderSettings] = None,
    mode: RenderMode = RenderMode.ANIMATED,
    lod_override: Optional[int] = None,
) -> Framebuffer:
    return render_frame_timed(crowd, camera, time, settings, mode, lod_override).framebuffer
