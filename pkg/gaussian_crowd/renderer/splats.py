"""
Splat gathering (projection of every instance's active level) and the global sort.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from gaussian_crowd.config import default_thread_count
from gaussian_crowd.constants import (
    ALPHA_CUTOFF,
    DEFAULT_BACKGROUND_RGB,
    DEFAULT_TILE_SIZE,
    TRANSMITTANCE_FLOOR,
)
from gaussian_crowd.core.camera import Camera
from gaussian_crowd.core.gaussian_math import (
    F32,
    build_covariances,
    conic_from_cov2d,
    project_gaussians,
    screen_bounds,
)
from gaussian_crowd.crowd.builder import Crowd, CrowdInstance
from gaussian_crowd.errors import InvalidInputError
from gaussian_crowd.types import RenderConfig


@dataclass(frozen=True)
class RenderSettings:
    tile_size: int = DEFAULT_TILE_SIZE
    background: Tuple[float, float, float] = DEFAULT_BACKGROUND_RGB
    alpha_cutoff: float = ALPHA_CUTOFF
    transmittance_floor: float = TRANSMITTANCE_FLOOR
    thread_count: Optional[int] = None
    blend_rotations: bool = False

    def __post_init__(self):
        if self.tile_size < 1:
            raise InvalidInputError("tile_size must be >= 1")
        if not (0.0 < self.alpha_cutoff < 1.0):
            raise InvalidInputError("alpha_cutoff must lie in (0, 1)")
        if not (0.0 < self.transmittance_floor < 1.0):
            raise InvalidInputError("transmittance_floor must lie in (0, 1)")
        background = tuple(float(c) for c in self.background)
        if len(background) != 3 or any(not np.isfinite(c) or c < 0.0 for c in background):
            raise InvalidInputError("background must be three finite values >= 0")
        if self.thread_count is not None and self.thread_count < 1:
            raise InvalidInputError("thread_count must be >= 1")
        object.__setattr__(self, "background", background)

    @property
    def threads(self) -> int:
        return self.thread_count or default_thread_count()

    @classmethod
    def from_config(cls, config: RenderConfig, **overrides) -> "RenderSettings":
        return cls(
            tile_size=config.tile_size,
            background=tuple(config.background_rgb),
            **overrides,
        )


@dataclass(frozen=True, eq=False)
class SplatFrame:
    """Structure-of-arrays screen-space splats; row order is compositing order once sorted"""

    mean_px: np.ndarray  # (M, 2) float32
    conic: np.ndarray  # (M, 3) float32 packed inverse covariance
    opacity: np.ndarray  # (M,) float32
    color: np.ndarray  # (M, 3) float32
    depth: np.ndarray  # (M,) float32
    rect: np.ndarray  # (M, 4) int32 inclusive x0, x1, y0, y1
    instance_id: np.ndarray  # (M,) int32
    gaussian_index: np.ndarray  # (M,) int32
    total_count: int = 0  # Gaussians considered before culling
    is_sorted: bool = False

    def __len__(self) -> int:
        return len(self.depth)

    @classmethod
    def empty(cls) -> "SplatFrame":
        return cls(
            mean_px=np.zeros((0, 2), F32),
            conic=np.zeros((0, 3), F32),
            opacity=np.zeros(0, F32),
            color=np.zeros((0, 3), F32),
            depth=np.zeros(0, F32),
            rect=np.zeros((0, 4), np.int32),
            instance_id=np.zeros(0, np.int32),
            gaussian_index=np.zeros(0, np.int32),
            is_sorted=True,
        )

    @classmethod
    def from_arrays(
        cls,
        mean_px,
        cov2d,
        depth,
        color,
        opacity,
        width: int,
        height: int,
        instance_id=None,
        gaussian_index=None,
    ) -> "SplatFrame":
        """Frame from explicit screen-space splats; ``cov2d`` is packed (xx, xy, yy)"""
        mean_px = np.asarray(mean_px, dtype=F32).reshape(-1, 2)
        cov2d = np.asarray(cov2d, dtype=F32).reshape(-1, 3)
        count = len(mean_px)
        if instance_id is None:
            instance_id = np.zeros(count)
        if gaussian_index is None:
            gaussian_index = np.arange(count)
        _, rect = screen_bounds(mean_px[:, 0], mean_px[:, 1], cov2d, width, height)
        return cls(
            mean_px=mean_px,
            conic=conic_from_cov2d(cov2d),
            opacity=np.asarray(opacity, dtype=F32).reshape(-1),
            color=np.asarray(color, dtype=F32).reshape(-1, 3),
            depth=np.asarray(depth, dtype=F32).reshape(-1),
            rect=rect,
            instance_id=np.asarray(instance_id, dtype=np.int32),
            gaussian_index=np.asarray(gaussian_index, dtype=np.int32),
            total_count=count,
        )

    def take(self, order: np.ndarray, is_sorted: bool) -> "SplatFrame":
        return SplatFrame(
            mean_px=self.mean_px[order],
            conic=self.conic[order],
            opacity=self.opacity[order],
            color=self.color[order],
            depth=self.depth[order],
            rect=self.rect[order],
            instance_id=self.instance_id[order],
            gaussian_index=self.gaussian_index[order],
            total_count=self.total_count,
            is_sorted=is_sorted,
        )


def _project_instance(crowd: Crowd, instance: CrowdInstance, camera: Camera):
    level = crowd.template_of(instance).levels[instance.active_lod or 0]
    means = instance.posed_means
    if len(means) != level.gaussian_count:
        # Never updated: fall back to the bind pose at the placement
        means = level.canonical_means @ instance.rotation.astype(F32).T + instance.position.astype(F32)

    rotations = instance.posed_rotations
    if rotations is not None:
        projected = project_gaussians(means, build_covariances(rotations, level.scales), camera)
    else:
        projected = project_gaussians(
            means, level.covariances, camera, model_rotation=instance.rotation
        )
    keep = np.flatnonzero(projected.visible)
    return (
        projected.mean_px[keep],
        conic_from_cov2d(projected.cov2d[keep]),
        level.opacities[keep],
        level.colors[keep],
        projected.depth[keep],
        projected.rect[keep],
        np.full(len(keep), instance.instance_id, dtype=np.int32),
        keep.astype(np.int32),
        level.gaussian_count,
    )


def gather_splats(
    crowd: Crowd, camera: Camera, threads: Optional[int] = None
) -> SplatFrame:
    """Project every instance's active level; culled splats are dropped.

    Parts are concatenated in instance order regardless of scheduling.
    """
    if not crowd.instances:
        return SplatFrame.empty()
    workers = threads or default_thread_count()

    def work(instance: CrowdInstance):
        return _project_instance(crowd, instance, camera)

    if workers <= 1 or len(crowd.instances) <= 1:
        parts: List[tuple] = [work(instance) for instance in crowd.instances]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, crowd.instances))

    columns = list(zip(*parts))
    return SplatFrame(
        mean_px=np.concatenate(columns[0]),
        conic=np.concatenate(columns[1]),
        opacity=np.concatenate(columns[2]),
        color=np.concatenate(columns[3]),
        depth=np.concatenate(columns[4]),
        rect=np.concatenate(columns[5]),
        instance_id=np.concatenate(columns[6]),
        gaussian_index=np.concatenate(columns[7]),
        total_count=int(sum(columns[8])),
    )


def sort_order(frame: SplatFrame) -> np.ndarray:
    """Ascending depth, ties broken by instance id then Gaussian index"""
    return np.lexsort((frame.gaussian_index, frame.instance_id, frame.depth))


def sort_splats(frame: SplatFrame) -> SplatFrame:
    if len(frame) == 0:
        return frame.take(np.zeros(0, dtype=np.int64), is_sorted=True)
    return frame.take(sort_order(frame), is_sorted=True)
