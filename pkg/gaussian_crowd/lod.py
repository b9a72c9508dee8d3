"""
Distance-based Level-of-Detail selection.

Intervals are half-open with the boundary belonging to the coarser level:
[0, t0) -> 0, [t0, t1) -> 1, ..., [t_last, inf) -> len(thresholds).
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from gaussian_crowd.constants import DEFAULT_HYSTERESIS_M, DEFAULT_LOD_THRESHOLDS_M
from gaussian_crowd.core.geometry import ensure_finite
from gaussian_crowd.errors import InvalidInputError
from gaussian_crowd.types import LodConfig


@dataclass(frozen=True)
class LodPolicy:
    thresholds: Tuple[float, ...] = DEFAULT_LOD_THRESHOLDS_M
    hysteresis_band: float = DEFAULT_HYSTERESIS_M

    def __post_init__(self):
        thresholds = tuple(float(t) for t in self.thresholds)
        if any(not math.isfinite(t) or t <= 0.0 for t in thresholds):
            raise InvalidInputError(f"LoD thresholds must be positive, got {thresholds}")
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise InvalidInputError(f"LoD thresholds must be strictly ascending, got {thresholds}")
        if not (self.hysteresis_band >= 0.0) or not math.isfinite(self.hysteresis_band):
            raise InvalidInputError("hysteresis band must be >= 0")
        object.__setattr__(self, "thresholds", thresholds)

    @property
    def level_count(self) -> int:
        return len(self.thresholds) + 1

    @classmethod
    def from_config(cls, config: LodConfig) -> "LodPolicy":
        return cls(tuple(config.thresholds_m), config.hysteresis_m)


def select_lod(
    policy: LodPolicy, distance: float, previous_level: Optional[int] = None
) -> int:
    """Level index for ``distance``.

    With a hysteresis band and a previous level, each boundary moves band/2 away from
    the previous level, so the instance must cross it by that margin to switch.
    """
    if not math.isfinite(distance) or distance < 0.0:
        raise InvalidInputError(f"distance must be finite and >= 0, got {distance}")
    half_band = 0.5 * policy.hysteresis_band
    level = 0
    for index, threshold in enumerate(policy.thresholds):
        boundary = threshold
        if previous_level is not None and half_band > 0.0:
            boundary = threshold + half_band if previous_level <= index else threshold - half_band
        if distance >= boundary:
            level += 1
    return level


def instance_distance(instance_root_position, camera_position) -> float:
    root = ensure_finite(np.asarray(instance_root_position, dtype=np.float64), "instance position")
    camera = ensure_finite(np.asarray(camera_position, dtype=np.float64), "camera position")
    return float(np.linalg.norm(root - camera))
