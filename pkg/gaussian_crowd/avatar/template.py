from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np

from gaussian_crowd.constants import SKIN_INFLUENCES, SKIN_WEIGHT_TOLERANCE
from gaussian_crowd.avatar.skeleton import Skeleton
from gaussian_crowd.core.gaussian_math import build_covariances
from gaussian_crowd.errors import TemplateInvariantError

_FLOAT_CHANNELS = (
    ("canonical_means", 3),
    ("rotations", 4),
    ("scales", 3),
    ("opacities", None),
    ("colors", 3),
    ("skin_weights", SKIN_INFLUENCES),
)


@dataclass(frozen=True, eq=False)
class LodLevel:
    """One resolution of a template; arrays are frozen after construction"""

    canonical_means: np.ndarray  # (N, 3) float32
    rotations: np.ndarray  # (N, 4) float32 (w, x, y, z)
    scales: np.ndarray  # (N, 3) float32
    opacities: np.ndarray  # (N,) float32
    colors: np.ndarray  # (N, 3) float32 linear RGB
    skin_indices: np.ndarray  # (N, 4) uint16
    skin_weights: np.ndarray  # (N, 4) float32

    def __post_init__(self):
        for name, width in _FLOAT_CHANNELS:
            value = np.ascontiguousarray(getattr(self, name), dtype=np.float32)
            expected = (len(self.canonical_means),) if width is None else (len(self.canonical_means), width)
            if value.shape != expected:
                raise TemplateInvariantError(f"{name} has shape {value.shape}, expected {expected}")
            object.__setattr__(self, name, value)
        indices = np.ascontiguousarray(self.skin_indices, dtype=np.uint16)
        if indices.shape != (self.gaussian_count, SKIN_INFLUENCES):
            raise TemplateInvariantError(f"skin_indices has shape {indices.shape}")
        object.__setattr__(self, "skin_indices", indices)
        self._check_values()
        for name, _ in _FLOAT_CHANNELS:
            getattr(self, name).flags.writeable = False
        self.skin_indices.flags.writeable = False

    def _check_values(self) -> None:
        if self.gaussian_count < 1:
            raise TemplateInvariantError("a level needs at least one Gaussian")
        for name, _ in _FLOAT_CHANNELS:
            if not np.all(np.isfinite(getattr(self, name))):
                raise TemplateInvariantError(f"{name} contains non-finite values")
        if np.any(self.scales <= 0.0):
            raise TemplateInvariantError("scales must be strictly positive")
        if np.any(self.opacities <= 0.0) or np.any(self.opacities > 1.0):
            raise TemplateInvariantError("opacities must lie in (0, 1]")
        if np.any(self.colors < 0.0) or np.any(self.colors > 1.0):
            raise TemplateInvariantError("colors must lie in [0, 1]")
        norms = np.linalg.norm(self.rotations.astype(np.float64), axis=-1)
        if np.any(np.abs(norms - 1.0) > 1e-5):
            raise TemplateInvariantError("rotations must be unit quaternions")
        if np.any(self.skin_weights < 0.0):
            raise TemplateInvariantError("skin weights must be non-negative")
        sums = self.skin_weights.astype(np.float64).sum(axis=1)
        if np.any(np.abs(sums - 1.0) > SKIN_WEIGHT_TOLERANCE):
            raise TemplateInvariantError("skin weights must sum to 1 per Gaussian")

    @property
    def gaussian_count(self) -> int:
        return len(self.canonical_means)

    @cached_property
    def covariances(self) -> np.ndarray:
        """Template-frame covariances, built once and shared by every instance"""
        cov = build_covariances(self.rotations, self.scales)
        cov.flags.writeable = False
        return cov

    def check_joint_indices(self, joint_count: int) -> None:
        if int(self.skin_indices.max(initial=0)) >= joint_count:
            raise TemplateInvariantError(
                f"skin index {int(self.skin_indices.max())} out of range for {joint_count} joints"
            )


@dataclass(frozen=True, eq=False)
class AvatarTemplate:
    template_id: str
    skeleton: Skeleton
    levels: Tuple[LodLevel, ...]

    def __post_init__(self):
        levels = tuple(self.levels)
        if not levels:
            raise TemplateInvariantError("a template needs at least one level")
        counts = [level.gaussian_count for level in levels]
        if any(b >= a for a, b in zip(counts, counts[1:])):
            raise TemplateInvariantError(
                f"level counts must be strictly decreasing, got {counts}"
            )
        for level in levels:
            level.check_joint_indices(self.skeleton.joint_count)
        object.__setattr__(self, "levels", levels)

    @property
    def level_count(self) -> int:
        return len(self.levels)

    @property
    def gaussian_counts(self) -> Tuple[int, ...]:
        return tuple(level.gaussian_count for level in self.levels)

    @property
    def max_gaussian_count(self) -> int:
        return self.levels[0].gaussian_count

    def clamp_level(self, level: int) -> int:
        return min(max(level, 0), self.level_count - 1)
