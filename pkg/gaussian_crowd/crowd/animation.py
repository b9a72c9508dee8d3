"""
Per-frame crowd update: LoD selection, pose sampling, forward kinematics and skinning.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np

from gaussian_crowd.avatar.skeleton import Pose, forward_kinematics, sample_pose
from gaussian_crowd.avatar.skinning import skin_means, skin_rotations
from gaussian_crowd.config import default_thread_count
from gaussian_crowd.core.camera import Camera
from gaussian_crowd.core.geometry import quaternion_from_matrix, quaternion_multiply
from gaussian_crowd.crowd.builder import Crowd, CrowdInstance
from gaussian_crowd.lod import instance_distance, select_lod
from gaussian_crowd.types import RenderMode


def _instance_pose(crowd: Crowd, instance: CrowdInstance, time: float, mode: RenderMode) -> Pose:
    template = crowd.template_of(instance)
    clip = crowd.motion_of(instance)
    if mode == RenderMode.STATIC or clip is None:
        return Pose.bind(template.skeleton.joint_count)
    return sample_pose(clip, time + instance.motion_phase_offset, wrap=True)


def _select_level(
    crowd: Crowd, instance: CrowdInstance, camera: Camera, lod_override: Optional[int]
) -> int:
    template = crowd.template_of(instance)
    if lod_override is not None:
        return template.clamp_level(lod_override)
    distance = instance_distance(instance.anchor(template), camera.position)
    level = select_lod(crowd.lod_policy, distance, instance.active_lod)
    return template.clamp_level(level)


def update_instance(
    crowd: Crowd,
    instance: CrowdInstance,
    camera: Camera,
    time: float,
    mode: RenderMode = RenderMode.ANIMATED,
    lod_override: Optional[int] = None,
    blend_rotations: bool = False,
) -> np.ndarray:
    """Refresh one instance's posed buffer and return its world-space means"""
    template = crowd.template_of(instance)
    level_index = _select_level(crowd, instance, camera, lod_override)
    level = template.levels[level_index]
    instance.ensure_buffers(template.max_gaussian_count, blend_rotations)
    instance.activate(level_index, level.gaussian_count, blend_rotations)

    pose = _instance_pose(crowd, instance, time, mode)
    rotation = instance.rotation.astype(np.float32)
    translation = instance.position.astype(np.float32)
    out = instance.posed_means

    if pose.is_bind():
        # LBS at bind pose is the identity
        local = level.canonical_means
        local_rotations = level.rotations
    else:
        world = forward_kinematics(template.skeleton, pose)
        local = skin_means(level, world, template.skeleton.inverse_bind, out=out)
        local_rotations = (
            skin_rotations(level, world, template.skeleton.inverse_bind)
            if blend_rotations
            else None
        )

    out[...] = local @ rotation.T + translation

    if blend_rotations:
        root_q = quaternion_from_matrix(instance.rotation).astype(np.float32)
        instance.posed_rotations[...] = quaternion_multiply(root_q, local_rotations)
    return out


def update_crowd(
    crowd: Crowd,
    camera: Camera,
    time: float,
    mode: RenderMode = RenderMode.ANIMATED,
    lod_override: Optional[int] = None,
    threads: Optional[int] = None,
    blend_rotations: bool = False,
) -> List[np.ndarray]:
    """Update every instance for ``time`` seconds and return their posed buffers.

    Template data is never written; each worker only touches the buffers of the
    instance it is given, so results do not depend on ``threads``.
    """
    mode = RenderMode(mode)
    workers = threads or default_thread_count()

    def work(instance: CrowdInstance) -> np.ndarray:
        return update_instance(
            crowd, instance, camera, time, mode, lod_override, blend_rotations
        )

    if workers <= 1 or len(crowd.instances) <= 1:
        return [work(instance) for instance in crowd.instances]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, crowd.instances))
