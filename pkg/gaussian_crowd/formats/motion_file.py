"""
GSMO motion clip container.

Layout (little-endian): header "<4sIfIH" (magic, version, fps, frame count, joint
count), then per frame the root translation f32[3] followed by f32[J][4] joint
quaternions (w, x, y, z).
"""

import math
import struct
from pathlib import Path
from typing import Union

import numpy as np

from gaussian_crowd.avatar.skeleton import MotionClip
from gaussian_crowd.constants import (
    LOG_MOTION_LOADED,
    LOG_MOTION_SAVED,
    MOTION_MAGIC,
    MOTION_VERSION,
)
from gaussian_crowd.errors import InvalidInputError, InvariantViolationError, ModelError
from gaussian_crowd.formats.binary import BinaryReader, le_bytes
from gaussian_crowd.formats.template_file import read_asset_bytes, write_asset_bytes
from gaussian_crowd.logger_config import get_crowd_logger, log_asset_loaded, log_asset_saved

logger = get_crowd_logger(__name__)

HEADER_FORMAT = "<4sIfIH"


def motion_to_bytes(clip: MotionClip) -> bytes:
    frames = np.concatenate(
        [clip.root_translations, clip.rotations.reshape(clip.frame_count, -1)], axis=1
    )
    header = struct.pack(
        HEADER_FORMAT, MOTION_MAGIC, MOTION_VERSION, clip.fps, clip.frame_count, clip.joint_count
    )
    return header + le_bytes(frames, "<f4")


def motion_from_bytes(data: bytes, name: str, source: str = "<memory>") -> MotionClip:
    reader = BinaryReader(data, source)
    reader.expect_magic(MOTION_MAGIC)
    version, fps, frame_count, joint_count = reader.unpack("<IfIH", "header")
    reader.expect_version("motion", version, MOTION_VERSION)
    if not math.isfinite(fps) or fps <= 0.0:
        raise InvariantViolationError(f"{source}: fps must be positive, found {fps}")
    if frame_count < 1 or joint_count < 1:
        raise InvariantViolationError(
            f"{source}: frame count {frame_count} and joint count {joint_count} must be >= 1"
        )

    floats_per_frame = 3 + 4 * joint_count
    if frame_count * floats_per_frame * 4 > reader.remaining:
        # walk the frames to report the section where the data runs out
        for k in range(frame_count):
            reader.array("<f4", (3,), f"frame[{k}].root_translation")
            reader.array("<f4", (joint_count, 4), f"frame[{k}].rotations")
    frames = reader.array("<f4", (frame_count, floats_per_frame), "frames")
    reader.finish()
    roots = frames[:, :3].copy()
    rotations = frames[:, 3:].reshape(frame_count, joint_count, 4)

    norms = np.linalg.norm(rotations.astype(np.float64), axis=-1)
    if np.any(norms == 0.0):
        raise InvariantViolationError(f"{source}: zero-length joint quaternion")
    try:
        return MotionClip(fps=fps, root_translations=roots, rotations=rotations, name=name)
    except (ModelError, InvalidInputError) as e:
        raise InvariantViolationError(f"{source}: {e}") from e


def save_motion(clip: MotionClip, path: Union[str, Path]) -> Path:
    path = Path(path)
    write_asset_bytes(path, motion_to_bytes(clip))
    log_asset_saved(logger, LOG_MOTION_SAVED.format(clip.name, path), str(path), clip.name)
    return path


def load_motion(path: Union[str, Path]) -> MotionClip:
    """Load a clip; its name is the file stem"""
    path = Path(path)
    clip = motion_from_bytes(read_asset_bytes(path), path.stem, str(path))
    log_asset_loaded(
        logger,
        LOG_MOTION_LOADED.format(clip.name, clip.frame_count, clip.fps),
        str(path),
        clip.name,
    )
    return clip
