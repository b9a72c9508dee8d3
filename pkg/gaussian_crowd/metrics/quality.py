"""
Image quality metrics and the LoD quality sweep.
"""

import math
from typing import Optional, Sequence, Union

import numpy as np

from gaussian_crowd.avatar.template import AvatarTemplate
from gaussian_crowd.constants import (
    ERROR_DIMENSION_MISMATCH,
    ERROR_SWEEP_LEVELS,
    PSNR_CAP_DB,
    PSNR_MAX_VALUE,
    SWEEP_DISTANCES_M,
)
from gaussian_crowd.core.camera import Camera
from gaussian_crowd.crowd.builder import Crowd
from gaussian_crowd.errors import DimensionMismatchError, InvalidCountsError
from gaussian_crowd.logger_config import get_crowd_logger
from gaussian_crowd.renderer.pipeline import render_frame
from gaussian_crowd.renderer.rasterizer import Framebuffer
from gaussian_crowd.renderer.splats import RenderSettings
from gaussian_crowd.types import QualityRow, QualityTable, RenderMode

logger = get_crowd_logger(__name__)

ImageLike = Union[Framebuffer, np.ndarray]


def _pixels(image: ImageLike) -> np.ndarray:
    if isinstance(image, Framebuffer):
        return image.pixels
    return np.asarray(image)


def psnr(a: ImageLike, b: ImageLike, max_value: float = PSNR_MAX_VALUE) -> float:
    """10 * log10(MAX^2 / MSE) over all channels; identical images give the cap"""
    pa, pb = _pixels(a), _pixels(b)
    if pa.shape != pb.shape:
        raise DimensionMismatchError(ERROR_DIMENSION_MISMATCH.format(pa.shape, pb.shape))
    diff = pa.astype(np.float64) - pb.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(max_value * max_value / mse))


def sweep_camera(template: AvatarTemplate, distance: float, prototype: Camera) -> Camera:
    """Camera ``distance`` meters in front of a character at the origin facing -z,
    level with the middle of its finest level's bounding box"""
    means = template.levels[0].canonical_means
    center_y = 0.5 * float(means[:, 1].min() + means[:, 1].max())
    return Camera.look_at(
        (0.0, center_y, -distance),
        (0.0, center_y, 0.0),
        fov_y_deg=prototype.fov_y_deg,
        width=prototype.width,
        height=prototype.height,
        near=prototype.near,
    )


def lod_quality_sweep(
    template: AvatarTemplate,
    distances: Sequence[float] = SWEEP_DISTANCES_M,
    camera: Optional[Camera] = None,
    settings: Optional[RenderSettings] = None,
) -> QualityTable:
    """PSNR of every level against the finest one, per camera distance.

    ``camera`` supplies field of view and resolution; its pose is replaced.
    """
    if template.level_count < 2:
        raise InvalidCountsError(ERROR_SWEEP_LEVELS.format(template.template_id, template.level_count))
    prototype = camera or Camera.look_at((0.0, 1.0, -3.0), (0.0, 1.0, 0.0))
    settings = settings or RenderSettings()
    crowd = Crowd.single(template)

    table = QualityTable(template_id=template.template_id)
    for distance in distances:
        view = sweep_camera(template, float(distance), prototype)
        renders = [
            render_frame(crowd, view, 0.0, settings, mode=RenderMode.STATIC, lod_override=level)
            for level in range(template.level_count)
        ]
        for level, image in enumerate(renders):
            table.rows.append(
                QualityRow(
                    distance_m=float(distance),
                    lod_level=level,
                    gaussian_count=template.levels[level].gaussian_count,
                    psnr_db=psnr(image, renders[0]),
                )
            )
        logger.info(
            f"Swept {template.template_id} at {distance:g} m",
            extra={"template_id": template.template_id, "event_type": "lod_sweep_distance"},
        )
    return table
