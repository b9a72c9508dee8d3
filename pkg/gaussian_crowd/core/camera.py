import math
from dataclasses import dataclass, field

import numpy as np

from gaussian_crowd.constants import DEFAULT_FOV_Y_DEG, DEFAULT_NEAR_M
from gaussian_crowd.core.geometry import ensure_finite, quaternion_to_matrix
from gaussian_crowd.errors import InvalidInputError
from gaussian_crowd.types import CameraConfig

WORLD_UP = np.array([0.0, 1.0, 0.0])


@dataclass(frozen=True, eq=False)
class Camera:
    """Pinhole camera; view space is x right, y down, z forward.

    The principal point is the image centre and pixel centres sit at integer + 0.5.
    """

    position: np.ndarray
    world_to_view: np.ndarray
    fov_y_deg: float = DEFAULT_FOV_Y_DEG
    width: int = 1280
    height: int = 720
    near: float = DEFAULT_NEAR_M
    _focal: float = field(init=False, repr=False)

    def __post_init__(self):
        if not (0.0 < self.fov_y_deg < 180.0):
            raise InvalidInputError(f"fov_y must lie in (0, 180), got {self.fov_y_deg}")
        if self.width < 1 or self.height < 1:
            raise InvalidInputError("camera resolution must be at least 1x1")
        if not self.near > 0.0:
            raise InvalidInputError("near plane must be positive")
        position = ensure_finite(np.asarray(self.position, dtype=np.float64), "camera position")
        rotation = ensure_finite(
            np.asarray(self.world_to_view, dtype=np.float64), "camera orientation"
        )
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "world_to_view", rotation)
        focal = 0.5 * self.height / math.tan(math.radians(self.fov_y_deg) * 0.5)
        object.__setattr__(self, "_focal", focal)

    @classmethod
    def look_at(
        cls,
        position,
        target,
        fov_y_deg: float = DEFAULT_FOV_Y_DEG,
        width: int = 1280,
        height: int = 720,
        near: float = DEFAULT_NEAR_M,
    ) -> "Camera":
        position = np.asarray(position, dtype=np.float64)
        forward = np.asarray(target, dtype=np.float64) - position
        norm = np.linalg.norm(forward)
        if norm == 0.0:
            raise InvalidInputError("camera target coincides with its position")
        forward /= norm
        up = WORLD_UP if abs(forward @ WORLD_UP) < 0.999 else np.array([0.0, 0.0, 1.0])
        right = np.cross(forward, up)
        right /= np.linalg.norm(right)
        down = np.cross(forward, right)
        rotation = np.stack([right, down, forward])
        return cls(position, rotation, fov_y_deg, width, height, near)

    @classmethod
    def from_orientation(
        cls,
        position,
        orientation,
        fov_y_deg: float = DEFAULT_FOV_Y_DEG,
        width: int = 1280,
        height: int = 720,
        near: float = DEFAULT_NEAR_M,
    ) -> "Camera":
        """Camera from a view-to-world unit quaternion (w, x, y, z)"""
        view_to_world = quaternion_to_matrix(np.asarray(orientation, dtype=np.float64))
        return cls(np.asarray(position), view_to_world.T, fov_y_deg, width, height, near)

    @property
    def focal_px(self) -> float:
        return self._focal

    @property
    def principal_point(self) -> np.ndarray:
        return np.array([0.5 * self.width, 0.5 * self.height])

    @property
    def translation(self) -> np.ndarray:
        return -self.world_to_view @ self.position

    def to_view(self, points: np.ndarray) -> np.ndarray:
        """World points (N, 3) to view space"""
        return np.asarray(points) @ self.world_to_view.T + self.translation


def camera_from_config(config: CameraConfig) -> Camera:
    return Camera.look_at(
        config.position,
        config.look_at,
        fov_y_deg=config.fov_y_deg,
        width=config.width,
        height=config.height,
        near=config.near,
    )
