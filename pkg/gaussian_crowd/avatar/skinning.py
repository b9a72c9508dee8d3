"""
Linear Blend Skinning of Gaussian means (and, optionally, orientations).
"""

from typing import Optional

import numpy as np

from gaussian_crowd.avatar.template import LodLevel
from gaussian_crowd.constants import SKIN_INFLUENCES
from gaussian_crowd.core.geometry import (
    normalize_quaternions,
    quaternion_from_matrix,
    quaternion_multiply,
)
from gaussian_crowd.errors import JointCountMismatchError


def skinning_matrices(world_transforms: np.ndarray, inverse_bind: np.ndarray) -> np.ndarray:
    """Per-joint bind-to-posed transforms A_j = world_j @ inverse_bind_j"""
    world_transforms = np.asarray(world_transforms, dtype=np.float64)
    inverse_bind = np.asarray(inverse_bind, dtype=np.float64)
    if world_transforms.shape != inverse_bind.shape:
        raise JointCountMismatchError(
            f"{len(world_transforms)} world transforms for {len(inverse_bind)} joints"
        )
    return world_transforms @ inverse_bind


def skin_means(
    level: LodLevel,
    world_transforms: np.ndarray,
    inverse_bind: np.ndarray,
    out: Optional[np.ndarray] = None,
) -> np.ndarray:
    """posed[i] = sum_k w[i, k] * A[idx[i, k]] @ canonical[i], in float32.

    ``out`` may be a caller-owned (N, 3) buffer; it is overwritten and returned.
    """
    blend = skinning_matrices(world_transforms, inverse_bind).astype(np.float32)
    rot = blend[:, :3, :3]
    trans = blend[:, :3, 3]
    points = level.canonical_means

    if out is None:
        out = np.zeros((level.gaussian_count, 3), dtype=np.float32)
    else:
        out[...] = 0.0
    for k in range(SKIN_INFLUENCES):
        joints = level.skin_indices[:, k]
        moved = np.einsum("nij,nj->ni", rot[joints], points) + trans[joints]
        out += level.skin_weights[:, k, None] * moved
    return out


def skin_rotations(
    level: LodLevel, world_transforms: np.ndarray, inverse_bind: np.ndarray
) -> np.ndarray:
    """Gaussian orientations rotated by the weight-blended joint rotation.

    Joint quaternions are sign-aligned with each Gaussian's first influence before
    blending, then renormalized.
    """
    blend = skinning_matrices(world_transforms, inverse_bind)
    joint_q = quaternion_from_matrix(blend[:, :3, :3]).astype(np.float32)

    first = joint_q[level.skin_indices[:, 0]]
    accum = np.zeros((level.gaussian_count, 4), dtype=np.float32)
    for k in range(SKIN_INFLUENCES):
        q = joint_q[level.skin_indices[:, k]]
        sign = np.where(np.sum(q * first, axis=-1) < 0.0, -1.0, 1.0).astype(np.float32)
        accum += (level.skin_weights[:, k] * sign)[:, None] * q
    blended = normalize_quaternions(accum)
    return normalize_quaternions(quaternion_multiply(blended, level.rotations)).astype(
        np.float32
    )
