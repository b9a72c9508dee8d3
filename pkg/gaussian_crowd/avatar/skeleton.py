"""
Skeleton hierarchy, poses, motion clips, forward kinematics and clip playback.

Joint local transforms are the bind-pose offset from the parent followed by the posed
local rotation; the root additionally composes the pose's root translation.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Tuple

import numpy as np

from gaussian_crowd.constants import (
    ERROR_EMPTY_CLIP,
    ERROR_JOINT_MISMATCH,
    QUATERNION_NORM_TOLERANCE,
)
from gaussian_crowd.core.geometry import (
    ensure_finite,
    invert_rigid,
    is_rigid,
    quaternion_to_matrix,
    slerp,
    translation_matrix,
)
from gaussian_crowd.errors import (
    EmptyClipError,
    InvalidInputError,
    JointCountMismatchError,
    TemplateInvariantError,
)

# SMPL joint order; parents precede children
SMPL_JOINT_NAMES: Tuple[str, ...] = (
    "pelvis",
    "left_hip",
    "right_hip",
    "spine1",
    "left_knee",
    "right_knee",
    "spine2",
    "left_ankle",
    "right_ankle",
    "spine3",
    "left_foot",
    "right_foot",
    "neck",
    "left_collar",
    "right_collar",
    "head",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hand",
    "right_hand",
)
SMPL_PARENTS: Tuple[int, ...] = (
    -1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21,
)
# Bind-pose joint positions in meters: y up, facing +z, character's left is +x
SMPL_BIND_POSITIONS = np.array(
    [
        [0.00, 0.95, 0.00],
        [0.09, 0.87, 0.00],
        [-0.09, 0.87, 0.00],
        [0.00, 1.05, 0.00],
        [0.10, 0.50, 0.01],
        [-0.10, 0.50, 0.01],
        [0.00, 1.18, 0.00],
        [0.10, 0.09, -0.02],
        [-0.10, 0.09, -0.02],
        [0.00, 1.32, 0.00],
        [0.10, 0.03, 0.10],
        [-0.10, 0.03, 0.10],
        [0.00, 1.50, 0.00],
        [0.07, 1.43, 0.00],
        [-0.07, 1.43, 0.00],
        [0.00, 1.62, 0.01],
        [0.18, 1.42, 0.00],
        [-0.18, 1.42, 0.00],
        [0.36, 1.22, 0.00],
        [-0.36, 1.22, 0.00],
        [0.52, 1.03, 0.02],
        [-0.52, 1.03, 0.02],
        [0.57, 0.97, 0.03],
        [-0.57, 0.97, 0.03],
    ]
)


@dataclass(frozen=True, eq=False)
class Skeleton:
    parents: np.ndarray  # (J,) int, root = -1
    inverse_bind: np.ndarray  # (J, 4, 4) world -> joint at bind pose

    def __post_init__(self):
        parents = np.asarray(self.parents, dtype=np.int64)
        inverse_bind = ensure_finite(
            np.asarray(self.inverse_bind, dtype=np.float64), "inverse bind matrices"
        )
        joint_count = len(parents)
        if joint_count < 1:
            raise TemplateInvariantError("skeleton needs at least one joint")
        if inverse_bind.shape != (joint_count, 4, 4):
            raise TemplateInvariantError(
                f"expected {joint_count} inverse bind matrices, got {inverse_bind.shape}"
            )
        if parents[0] != -1 or np.count_nonzero(parents == -1) != 1:
            raise TemplateInvariantError("skeleton must have exactly one root at index 0")
        if np.any(parents[1:] >= np.arange(1, joint_count)) or np.any(parents[1:] < 0):
            raise TemplateInvariantError("every parent must precede its child")
        if not is_rigid(inverse_bind):
            raise TemplateInvariantError("inverse bind matrices must be rigid")
        parents.flags.writeable = False
        inverse_bind.flags.writeable = False
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "inverse_bind", inverse_bind)

    @property
    def joint_count(self) -> int:
        return len(self.parents)

    @cached_property
    def bind_world(self) -> np.ndarray:
        return invert_rigid(self.inverse_bind)

    @cached_property
    def local_bind(self) -> np.ndarray:
        """Bind-pose transform of each joint relative to its parent"""
        world = self.bind_world
        local = np.empty_like(world)
        local[0] = world[0]
        for j in range(1, self.joint_count):
            local[j] = invert_rigid(world[self.parents[j]]) @ world[j]
        return local

    @classmethod
    def from_bind_positions(cls, parents, positions) -> "Skeleton":
        """Skeleton whose bind-pose joint frames are unrotated translations"""
        positions = np.asarray(positions, dtype=np.float64)
        inverse_bind = np.stack([translation_matrix(-p) for p in positions])
        return cls(np.asarray(parents), inverse_bind)


def smpl_skeleton() -> Skeleton:
    return Skeleton.from_bind_positions(SMPL_PARENTS, SMPL_BIND_POSITIONS)


@dataclass(frozen=True, eq=False)
class Pose:
    root_translation: np.ndarray  # (3,)
    local_rotations: np.ndarray  # (J, 4) unit quaternions (w, x, y, z)

    def __post_init__(self):
        root = ensure_finite(np.asarray(self.root_translation, dtype=np.float64), "root translation")
        rotations = ensure_finite(
            np.asarray(self.local_rotations, dtype=np.float64), "local rotations"
        )
        norms = np.linalg.norm(rotations, axis=-1)
        if np.any(np.abs(norms - 1.0) > QUATERNION_NORM_TOLERANCE):
            rotations = rotations / norms[:, None]
        object.__setattr__(self, "root_translation", root)
        object.__setattr__(self, "local_rotations", rotations)

    @property
    def joint_count(self) -> int:
        return len(self.local_rotations)

    @classmethod
    def bind(cls, joint_count: int) -> "Pose":
        rotations = np.zeros((joint_count, 4))
        rotations[:, 0] = 1.0
        return cls(np.zeros(3), rotations)

    def is_bind(self) -> bool:
        """True for identity rotations and zero root translation"""
        return bool(
            np.all(self.root_translation == 0.0)
            and np.all(self.local_rotations[:, 0] == 1.0)
            and np.all(self.local_rotations[:, 1:] == 0.0)
        )


@dataclass(frozen=True, eq=False)
class MotionClip:
    fps: float
    root_translations: np.ndarray  # (F, 3)
    rotations: np.ndarray  # (F, J, 4)
    name: str = field(default="")

    def __post_init__(self):
        if not (self.fps > 0.0) or not math.isfinite(self.fps):
            raise InvalidInputError(f"motion fps must be positive, got {self.fps}")
        roots = ensure_finite(np.asarray(self.root_translations, dtype=np.float32), "root translations")
        rotations = ensure_finite(np.asarray(self.rotations, dtype=np.float32), "rotations")
        if len(roots) == 0 or len(rotations) == 0:
            raise EmptyClipError(ERROR_EMPTY_CLIP)
        if rotations.ndim != 3 or rotations.shape[2] != 4 or len(roots) != len(rotations):
            raise InvalidInputError("motion arrays must be (F, 3) and (F, J, 4)")
        roots.flags.writeable = False
        rotations.flags.writeable = False
        object.__setattr__(self, "root_translations", roots)
        object.__setattr__(self, "rotations", rotations)

    @property
    def frame_count(self) -> int:
        return len(self.rotations)

    @property
    def joint_count(self) -> int:
        return self.rotations.shape[1]

    @property
    def duration(self) -> float:
        """Seconds from the first to the last frame"""
        return (self.frame_count - 1) / self.fps

    def frame(self, index: int) -> Pose:
        return Pose(self.root_translations[index], self.rotations[index])

    @property
    def frames(self) -> Tuple[Pose, ...]:
        return tuple(self.frame(i) for i in range(self.frame_count))


def forward_kinematics(skeleton: Skeleton, pose: Pose) -> np.ndarray:
    """World transforms (J, 4, 4): world[j] = world[parent] @ local_bind[j] @ R(q_j)"""
    if pose.joint_count != skeleton.joint_count:
        raise JointCountMismatchError(
            ERROR_JOINT_MISMATCH.format(pose.joint_count, skeleton.joint_count)
        )
    local_rot = np.zeros((skeleton.joint_count, 4, 4))
    local_rot[:, :3, :3] = quaternion_to_matrix(pose.local_rotations)
    local_rot[:, 3, 3] = 1.0
    local = skeleton.local_bind @ local_rot

    world = np.empty_like(local)
    world[0] = translation_matrix(pose.root_translation) @ local[0]
    parents = skeleton.parents
    for j in range(1, skeleton.joint_count):
        world[j] = world[parents[j]] @ local[j]
    return world


def sample_pose(clip: MotionClip, time: float, wrap: bool = True) -> Pose:
    """Pose at ``time`` seconds: lerp of root translation, shortest-arc slerp of rotations"""
    if clip.frame_count == 0:
        raise EmptyClipError(ERROR_EMPTY_CLIP)
    if not math.isfinite(time) or time < 0.0:
        raise InvalidInputError(f"sample time must be finite and >= 0, got {time}")

    duration = clip.duration
    if duration == 0.0:
        return clip.frame(0)
    if wrap:
        time = math.fmod(time, duration)
    else:
        time = min(time, duration)

    position = time * clip.fps
    index = int(math.floor(position))
    if index >= clip.frame_count - 1:
        return clip.frame(clip.frame_count - 1)
    fraction = position - index
    if fraction == 0.0:
        return clip.frame(index)

    root0 = clip.root_translations[index].astype(np.float64)
    root1 = clip.root_translations[index + 1].astype(np.float64)
    rotations = slerp(clip.rotations[index], clip.rotations[index + 1], fraction)
    return Pose(root0 + (root1 - root0) * fraction, rotations)
