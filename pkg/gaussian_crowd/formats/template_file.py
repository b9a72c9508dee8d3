"""
GSAT avatar template container.

Layout (little-endian): header "<4sIHB" (magic, version, joint count, level count),
parents int16[J], inverse binds float32[J][4][4] row-major, then per level a uint32
Gaussian count followed by means f32[N][3], rotations f32[N][4] (w, x, y, z),
scales f32[N][3], opacities f32[N], colors f32[N][3], skin indices u16[N][4] and
skin weights f32[N][4]. FORMATS.md has the byte-offset table.
"""

import struct
from pathlib import Path
from typing import Union

import numpy as np

from gaussian_crowd.avatar.skeleton import Skeleton
from gaussian_crowd.avatar.template import AvatarTemplate, LodLevel
from gaussian_crowd.constants import (
    ERROR_MISSING_ASSET,
    LOG_TEMPLATE_LOADED,
    LOG_TEMPLATE_SAVED,
    SKIN_INFLUENCES,
    SKIN_WEIGHT_TOLERANCE,
    TEMPLATE_MAGIC,
    TEMPLATE_VERSION,
)
from gaussian_crowd.errors import (
    AssetError,
    InvalidInputError,
    InvariantViolationError,
    MissingAssetError,
    ModelError,
)
from gaussian_crowd.formats.binary import BinaryReader, le_bytes
from gaussian_crowd.logger_config import get_crowd_logger, log_asset_loaded, log_asset_saved

logger = get_crowd_logger(__name__)

HEADER_FORMAT = "<4sIHB"
LEVEL_COUNT_FORMAT = "<I"

PathLike = Union[str, Path]


def read_asset_bytes(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except FileNotFoundError as e:
        raise MissingAssetError(ERROR_MISSING_ASSET.format(path), str(path)) from e
    except OSError as e:
        raise AssetError(f"cannot read {path}: {e}") from e


def write_asset_bytes(path: Path, payload: bytes) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(payload)
    except OSError as e:
        raise AssetError(f"cannot write {path}: {e}") from e


def renormalize_weights(weights: np.ndarray, source: str) -> np.ndarray:
    """Rescale rows whose sum is off by more than the tolerance; reject bad rows"""
    if np.any(weights < 0.0):
        raise InvariantViolationError(f"{source}: negative skin weights")
    sums = weights.astype(np.float64).sum(axis=1)
    if np.any(sums <= 0.0):
        raise InvariantViolationError(f"{source}: skin weights sum to zero")
    off = np.abs(sums - 1.0) > SKIN_WEIGHT_TOLERANCE
    if np.any(off):
        weights = weights.copy()
        weights[off] = (weights[off] / sums[off, None]).astype(np.float32)
    return weights


def template_to_bytes(template: AvatarTemplate) -> bytes:
    skeleton = template.skeleton
    parts = [
        struct.pack(
            HEADER_FORMAT,
            TEMPLATE_MAGIC,
            TEMPLATE_VERSION,
            skeleton.joint_count,
            template.level_count,
        ),
        le_bytes(skeleton.parents, "<i2"),
        le_bytes(skeleton.inverse_bind, "<f4"),
    ]
    for level in template.levels:
        parts += [
            struct.pack(LEVEL_COUNT_FORMAT, level.gaussian_count),
            le_bytes(level.canonical_means, "<f4"),
            le_bytes(level.rotations, "<f4"),
            le_bytes(level.scales, "<f4"),
            le_bytes(level.opacities, "<f4"),
            le_bytes(level.colors, "<f4"),
            le_bytes(level.skin_indices, "<u2"),
            le_bytes(level.skin_weights, "<f4"),
        ]
    return b"".join(parts)


def template_from_bytes(data: bytes, template_id: str, source: str = "<memory>") -> AvatarTemplate:
    reader = BinaryReader(data, source)
    reader.expect_magic(TEMPLATE_MAGIC)
    version, joint_count, level_count = reader.unpack("<IHB", "header")
    reader.expect_version("template", version, TEMPLATE_VERSION)
    if joint_count < 1 or level_count < 1:
        raise InvariantViolationError(
            f"{source}: joint count {joint_count} and level count {level_count} must be >= 1"
        )

    parents = reader.array("<i2", (joint_count,), "parents")
    inverse_bind = reader.array("<f4", (joint_count, 4, 4), "inverse_binds")

    raw_levels = []
    for index in range(level_count):
        prefix = f"level[{index}]"
        (count,) = reader.unpack(LEVEL_COUNT_FORMAT, f"{prefix}.count")
        if count < 1:
            raise InvariantViolationError(f"{source}: {prefix} has no Gaussians")
        raw_levels.append(
            dict(
                canonical_means=reader.array("<f4", (count, 3), f"{prefix}.means"),
                rotations=reader.array("<f4", (count, 4), f"{prefix}.rotations"),
                scales=reader.array("<f4", (count, 3), f"{prefix}.scales"),
                opacities=reader.array("<f4", (count,), f"{prefix}.opacities"),
                colors=reader.array("<f4", (count, 3), f"{prefix}.colors"),
                skin_indices=reader.array("<u2", (count, SKIN_INFLUENCES), f"{prefix}.skin_indices"),
                skin_weights=reader.array("<f4", (count, SKIN_INFLUENCES), f"{prefix}.skin_weights"),
            )
        )
    reader.finish()

    try:
        levels = []
        for fields in raw_levels:
            fields["skin_weights"] = renormalize_weights(fields["skin_weights"], source)
            levels.append(LodLevel(**fields))
        skeleton = Skeleton(parents.astype(np.int64), inverse_bind.astype(np.float64))
        return AvatarTemplate(template_id=template_id, skeleton=skeleton, levels=tuple(levels))
    except (ModelError, InvalidInputError) as e:
        raise InvariantViolationError(f"{source}: {e}") from e


def save_template(template: AvatarTemplate, path: PathLike) -> Path:
    path = Path(path)
    write_asset_bytes(path, template_to_bytes(template))
    log_asset_saved(
        logger, LOG_TEMPLATE_SAVED.format(template.template_id, path), str(path), template.template_id
    )
    return path


def load_template(path: PathLike) -> AvatarTemplate:
    """Load a template; its id is the file stem"""
    path = Path(path)
    template = template_from_bytes(read_asset_bytes(path), path.stem, str(path))
    log_asset_loaded(
        logger,
        LOG_TEMPLATE_LOADED.format(
            template.template_id,
            template.level_count,
            ", ".join(str(c) for c in template.gaussian_counts),
        ),
        str(path),
        template.template_id,
    )
    return template
