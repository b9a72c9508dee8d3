"""
Gaussian primitive math: 3D covariance construction, EWA projection to screen-space
splats and alpha falloff. Everything is evaluated in float32.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from gaussian_crowd.constants import (
    ALPHA_CUTOFF,
    ALPHA_MAX,
    EXTENT_SIGMA,
    LOW_PASS_DILATION_PX2,
    QUATERNION_NORM_TOLERANCE,
)
from gaussian_crowd.core.camera import Camera
from gaussian_crowd.core.geometry import ensure_finite, quaternion_to_matrix
from gaussian_crowd.errors import InvalidInputError

F32 = np.float32


@dataclass(frozen=True, eq=False)
class Gaussian3D:
    mean: np.ndarray
    rotation: np.ndarray
    scale: np.ndarray
    opacity: float
    color: np.ndarray

    def __post_init__(self):
        for name in ("mean", "rotation", "scale", "color"):
            value = ensure_finite(np.asarray(getattr(self, name), dtype=F32), name)
            object.__setattr__(self, name, value)
        if abs(float(np.linalg.norm(self.rotation.astype(np.float64))) - 1.0) > QUATERNION_NORM_TOLERANCE:
            raise InvalidInputError("Gaussian rotation must be a unit quaternion")
        if np.any(self.scale <= 0.0):
            raise InvalidInputError("Gaussian scales must be strictly positive")
        if not (0.0 < self.opacity <= 1.0):
            raise InvalidInputError("Gaussian opacity must lie in (0, 1]")
        if np.any(self.color < 0.0) or np.any(self.color > 1.0):
            raise InvalidInputError("Gaussian color components must lie in [0, 1]")

    @property
    def covariance(self) -> np.ndarray:
        return build_covariance(self.rotation, self.scale)


@dataclass(frozen=True, eq=False)
class Splat2D:
    mean_px: np.ndarray
    cov2d: np.ndarray
    depth: float
    color: np.ndarray
    opacity: float

    @property
    def conic(self) -> np.ndarray:
        """Inverse covariance packed as (a, b, c) for [[a, b], [b, c]]"""
        packed = np.array(
            [[self.cov2d[0, 0], self.cov2d[0, 1], self.cov2d[1, 1]]], dtype=F32
        )
        return conic_from_cov2d(packed)[0]


@dataclass(frozen=True, eq=False)
class ProjectedGaussians:
    """Batch projection result; rows where ``visible`` is False are culled"""

    mean_px: np.ndarray  # (N, 2)
    cov2d: np.ndarray  # (N, 3) packed (xx, xy, yy), dilated
    depth: np.ndarray  # (N,)
    rect: np.ndarray  # (N, 4) inclusive pixel bounds x0, x1, y0, y1
    visible: np.ndarray  # (N,) bool


def build_covariances(rotations: np.ndarray, scales: np.ndarray) -> np.ndarray:
    """Sigma = R S S^T R^T for (N, 4) quaternions and (N, 3) scales"""
    rotations = ensure_finite(np.asarray(rotations, dtype=F32), "rotation")
    scales = ensure_finite(np.asarray(scales, dtype=F32), "scale")
    if np.any(scales <= 0.0):
        raise InvalidInputError("Gaussian scales must be strictly positive")
    norms = np.linalg.norm(rotations.astype(np.float64), axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        raise InvalidInputError("zero-length quaternion")
    unit = (rotations / norms).astype(F32)
    m = quaternion_to_matrix(unit) * scales[..., None, :]
    return np.matmul(m, np.swapaxes(m, -1, -2))


def build_covariance(rotation, scale) -> np.ndarray:
    """Single 3x3 covariance; eigenvalues are the squared scales"""
    rotation = np.asarray(rotation, dtype=F32)
    if abs(float(np.linalg.norm(rotation.astype(np.float64))) - 1.0) > QUATERNION_NORM_TOLERANCE:
        raise InvalidInputError("rotation must be a unit quaternion")
    return build_covariances(rotation[None], np.asarray(scale, dtype=F32)[None])[0]


def conic_from_cov2d(cov2d: np.ndarray) -> np.ndarray:
    """Packed inverse of packed symmetric 2x2 matrices"""
    a, b, c = cov2d[:, 0], cov2d[:, 1], cov2d[:, 2]
    det = a * c - b * b
    inv_det = F32(1.0) / det
    return np.stack([c * inv_det, -b * inv_det, a * inv_det], axis=-1).astype(F32)


def gaussian_alpha(
    dx: np.ndarray,
    dy: np.ndarray,
    conic_a: np.ndarray,
    conic_b: np.ndarray,
    conic_c: np.ndarray,
    opacity: np.ndarray,
    alpha_max: float = ALPHA_MAX,
    alpha_cutoff: float = ALPHA_CUTOFF,
) -> np.ndarray:
    """Elementwise alpha = min(alpha_max, o * exp(-d^T conic d / 2)), zero below cutoff.

    Shared by the scalar probe and both rasterizer paths so their float32 results
    agree bit for bit.
    """
    half = F32(0.5)
    power = -half * (conic_a * dx * dx + conic_c * dy * dy) - conic_b * dx * dy
    alpha = np.minimum(F32(alpha_max), opacity * np.exp(np.ascontiguousarray(power)))
    return np.where(alpha < F32(alpha_cutoff), F32(0.0), alpha).astype(F32)


def eval_alpha(
    splat: Splat2D,
    pixel_center,
    alpha_max: float = ALPHA_MAX,
    alpha_cutoff: float = ALPHA_CUTOFF,
) -> float:
    pixel_center = np.asarray(pixel_center, dtype=F32)
    d = pixel_center - splat.mean_px.astype(F32)
    conic = splat.conic
    alpha = gaussian_alpha(
        np.array([d[0]], dtype=F32),
        np.array([d[1]], dtype=F32),
        conic[0],
        conic[1],
        conic[2],
        F32(splat.opacity),
        alpha_max,
        alpha_cutoff,
    )
    return float(alpha[0])


def screen_bounds(
    u: np.ndarray, v: np.ndarray, cov2d: np.ndarray, width: int, height: int
):
    """3-sigma support of splats centred at (u, v).

    Returns (overlaps, rect) where rect rows are inclusive pixel bounds
    (x0, x1, y0, y1) clipped to the image; a pixel i is covered when its centre
    i + 0.5 lies within the extent. Rows that miss the image get an empty rect.
    """
    u = np.asarray(u, dtype=F32)
    v = np.asarray(v, dtype=F32)
    sigma = F32(EXTENT_SIGMA)
    ext_x = sigma * np.sqrt(cov2d[:, 0])
    ext_y = sigma * np.sqrt(cov2d[:, 2])
    half = F32(0.5)
    bounds = np.stack(
        [
            np.ceil(u - ext_x - half),
            np.floor(u + ext_x - half),
            np.ceil(v - ext_y - half),
            np.floor(v + ext_y - half),
        ],
        axis=-1,
    ).astype(np.float64)
    bounds[:, 0] = np.maximum(bounds[:, 0], 0.0)
    bounds[:, 1] = np.minimum(bounds[:, 1], width - 1.0)
    bounds[:, 2] = np.maximum(bounds[:, 2], 0.0)
    bounds[:, 3] = np.minimum(bounds[:, 3], height - 1.0)
    overlaps = (bounds[:, 0] <= bounds[:, 1]) & (bounds[:, 2] <= bounds[:, 3])
    # Clamp before the integer cast so far-off splats cannot overflow
    rect = np.clip(bounds, -1.0, max(width, height)).astype(np.int32)
    rect[~overlaps] = (0, -1, 0, -1)
    return overlaps, rect


def project_gaussians(
    means: np.ndarray,
    covariances: np.ndarray,
    camera: Camera,
    model_rotation: Optional[np.ndarray] = None,
) -> ProjectedGaussians:
    """EWA projection of world-space Gaussians.

    ``covariances`` are (N, 3, 3); when ``model_rotation`` is given they are expressed
    in a model frame and rotated into world space first (Sigma_w = R Sigma R^T).
    """
    means = ensure_finite(np.asarray(means, dtype=F32), "Gaussian means")
    covariances = ensure_finite(np.asarray(covariances, dtype=F32), "covariances")
    w2v = camera.world_to_view.astype(F32)
    view = means @ w2v.T + camera.translation.astype(F32)
    x, y, z = view[:, 0], view[:, 1], view[:, 2]
    in_front = z > F32(camera.near)
    safe_z = np.where(in_front, z, F32(1.0))

    f = F32(camera.focal_px)
    cx, cy = (F32(v) for v in camera.principal_point)
    inv_z = F32(1.0) / safe_z
    u = f * x * inv_z + cx
    v = f * y * inv_z + cy

    # Jacobian of the perspective map at the mean, composed with the view rotation
    rot = w2v if model_rotation is None else w2v @ np.asarray(model_rotation, dtype=F32)
    jac = np.zeros((len(means), 2, 3), dtype=F32)
    jac[:, 0, 0] = f * inv_z
    jac[:, 0, 2] = -f * x * inv_z * inv_z
    jac[:, 1, 1] = f * inv_z
    jac[:, 1, 2] = -f * y * inv_z * inv_z
    t = jac @ rot
    cov2 = t @ covariances @ np.swapaxes(t, -1, -2)
    dilation = F32(LOW_PASS_DILATION_PX2)
    cov2d = np.stack(
        [cov2[:, 0, 0] + dilation, cov2[:, 0, 1], cov2[:, 1, 1] + dilation], axis=-1
    ).astype(F32)

    overlaps, rect = screen_bounds(u, v, cov2d, camera.width, camera.height)
    visible = in_front & overlaps
    rect[~visible] = (0, -1, 0, -1)

    return ProjectedGaussians(
        mean_px=np.stack([u, v], axis=-1).astype(F32),
        cov2d=cov2d,
        depth=z.astype(F32),
        rect=rect,
        visible=visible,
    )


def project_gaussian(gaussian: Gaussian3D, camera: Camera) -> Optional[Splat2D]:
    """Project one Gaussian; None means culled"""
    projected = project_gaussians(
        gaussian.mean[None], gaussian.covariance[None], camera
    )
    if not projected.visible[0]:
        return None
    a, b, c = projected.cov2d[0]
    return Splat2D(
        mean_px=projected.mean_px[0],
        cov2d=np.array([[a, b], [b, c]], dtype=F32),
        depth=float(projected.depth[0]),
        color=gaussian.color,
        opacity=float(gaussian.opacity),
    )
