"""
Procedural stand-ins for reconstructed avatars and captured motion.

Templates are humanoids built from ten Gaussian-sampled body parts (torso, head and two
segments per limb) rigged to the SMPL hierarchy. Each seed draws its own outfit colors.
Motions are looping walk, wave or idle cycles.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from gaussian_crowd.avatar.skeleton import (
    SMPL_BIND_POSITIONS,
    MotionClip,
    smpl_skeleton,
)
from gaussian_crowd.avatar.template import AvatarTemplate, LodLevel
from gaussian_crowd.constants import (
    DEFAULT_MOTION_FPS,
    DEFAULT_MOTION_FRAMES,
    DEFAULT_TEMPLATE_OPACITY,
    ERROR_COUNTS_NOT_DECREASING,
    SKIN_INFLUENCES,
    SMPL_JOINT_COUNT,
)
from gaussian_crowd.core.geometry import (
    quaternion_from_axis_angle,
    quaternion_multiply,
    quaternion_rotating_z_to,
)
from gaussian_crowd.errors import InvalidCountsError, InvalidInputError
from gaussian_crowd.types import MotionStyle

# Fraction of a limb segment, at each end, over which weights blend into the neighbor
BLEND_ZONE = 0.2
NORMAL_SCALE_RATIO = 0.3
TANGENT_SCALE_FACTOR = 0.5
COLOR_NOISE = 0.04
SHELL_DEPTH = 0.08

SPINE_CHAIN = (0, 3, 6, 9, 12)

SKIN_TONES = (
    (0.93, 0.76, 0.62),
    (0.84, 0.64, 0.49),
    (0.67, 0.47, 0.33),
    (0.45, 0.30, 0.21),
    (0.30, 0.20, 0.14),
)
HAIR_COLORS = (
    (0.08, 0.06, 0.05),
    (0.30, 0.18, 0.09),
    (0.62, 0.45, 0.22),
    (0.55, 0.55, 0.55),
)


@dataclass(frozen=True)
class _Capsule:
    name: str
    start: int  # joint index at s = 0
    end: Tuple[float, float, float]  # segment end point
    radii: Tuple[float, float]
    driver: int
    parent: int  # joint blended in near s = 0 (-1 = none)
    child: int  # joint blended in near s = 1 (-1 = none)
    material: str


def _limb_parts() -> List[_Capsule]:
    p = SMPL_BIND_POSITIONS
    parts = []
    for side, (hip, knee, ankle, collar, shoulder, elbow, wrist, hand) in (
        ("left", (1, 4, 7, 13, 16, 18, 20, 22)),
        ("right", (2, 5, 8, 14, 17, 19, 21, 23)),
    ):
        parts.extend(
            [
                _Capsule(f"{side}_upper_arm", shoulder, tuple(p[elbow]), (0.046, 0.046), shoulder, collar, elbow, "shirt"),
                _Capsule(f"{side}_lower_arm", elbow, tuple(p[hand]), (0.038, 0.034), elbow, shoulder, wrist, "skin"),
                _Capsule(f"{side}_upper_leg", hip, tuple(p[knee]), (0.072, 0.072), hip, 0, knee, "pants"),
                _Capsule(f"{side}_lower_leg", knee, tuple(p[ankle] - [0.0, 0.06, 0.0]), (0.052, 0.052), knee, hip, ankle, "pants_shoes"),
            ]
        )
    return parts


TORSO_BOTTOM = np.array([0.0, 0.84, 0.0])
TORSO_TOP = np.array([0.0, 1.50, 0.0])
TORSO_RADII = (0.16, 0.11)
HEAD_CENTER = np.array([0.0, 1.70, 0.02])
HEAD_RADII = np.array([0.090, 0.115, 0.100])
HEAD_JOINT = 15


def _capsule_area(length: float, radii: Tuple[float, float]) -> float:
    rx, rz = radii
    return length * 2.0 * np.pi * np.sqrt(0.5 * (rx * rx + rz * rz))


def _ellipsoid_area(radii: np.ndarray) -> float:
    # Knud Thomsen's approximation
    p = 1.6075
    a, b, c = radii
    return 4.0 * np.pi * (((a * b) ** p + (a * c) ** p + (b * c) ** p) / 3.0) ** (1.0 / p)


def _allocate(total: int, areas: Sequence[float]) -> np.ndarray:
    """Split ``total`` across parts proportionally to area, largest remainder first"""
    areas = np.asarray(areas, dtype=np.float64)
    exact = total * areas / areas.sum()
    counts = np.floor(exact).astype(np.int64)
    remainder = total - int(counts.sum())
    order = np.argsort(-(exact - counts), kind="stable")
    counts[order[:remainder]] += 1
    return counts


def _segment_frame(direction: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    ref = np.array([0.0, 0.0, 1.0])
    if abs(direction @ ref) > 0.9:
        ref = np.array([1.0, 0.0, 0.0])
    e2 = ref - (ref @ direction) * direction
    e2 /= np.linalg.norm(e2)
    e1 = np.cross(direction, e2)
    return e1, e2


def _sample_capsule(rng, start, end, radii, n):
    start = np.asarray(start, dtype=np.float64)
    end = np.asarray(end, dtype=np.float64)
    axis = end - start
    length = float(np.linalg.norm(axis))
    direction = axis / length
    e1, e2 = _segment_frame(direction)
    rx, rz = radii

    s = rng.uniform(0.0, 1.0, n)
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    depth = 1.0 - SHELL_DEPTH * rng.uniform(0.0, 1.0, n)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    offset = (depth * rx * cos_t)[:, None] * e1 + (depth * rz * sin_t)[:, None] * e2
    points = start + s[:, None] * axis + offset
    normals = (cos_t / rx)[:, None] * e1 + (sin_t / rz)[:, None] * e2
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return points, normals, s


def _sample_ellipsoid(rng, center, radii, n):
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    depth = 1.0 - SHELL_DEPTH * rng.uniform(0.0, 1.0, n)
    points = center + depth[:, None] * direction * radii
    normals = direction / radii
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return points, normals


def _limb_weights(part: _Capsule, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = len(s)
    indices = np.full((n, SKIN_INFLUENCES), part.driver, dtype=np.int64)
    weights = np.zeros((n, SKIN_INFLUENCES))
    weights[:, 0] = 1.0

    near_start = s < BLEND_ZONE
    if part.parent >= 0:
        w = 0.5 * (1.0 - s[near_start] / BLEND_ZONE)
        indices[near_start, 1] = part.parent
        weights[near_start, 1] = w
        weights[near_start, 0] = 1.0 - w

    near_end = s > 1.0 - BLEND_ZONE
    if part.child >= 0:
        w = 0.5 * (s[near_end] - (1.0 - BLEND_ZONE)) / BLEND_ZONE
        indices[near_end, 1] = part.child
        weights[near_end, 1] = w
        weights[near_end, 0] = 1.0 - w
    return indices, weights


def _spine_weights(heights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Linear blend between the two spine-chain joints bracketing each height"""
    chain_y = SMPL_BIND_POSITIONS[list(SPINE_CHAIN), 1]
    n = len(heights)
    indices = np.zeros((n, SKIN_INFLUENCES), dtype=np.int64)
    weights = np.zeros((n, SKIN_INFLUENCES))
    y = np.clip(heights, chain_y[0], chain_y[-1])
    segment = np.clip(np.searchsorted(chain_y, y, side="right") - 1, 0, len(chain_y) - 2)
    lo, hi = chain_y[segment], chain_y[segment + 1]
    t = (y - lo) / (hi - lo)
    chain = np.asarray(SPINE_CHAIN)
    indices[:, 0] = chain[segment]
    indices[:, 1] = chain[segment + 1]
    indices[:, 2:] = chain[segment][:, None]
    weights[:, 0] = 1.0 - t
    weights[:, 1] = t
    return indices, weights


def _outfit(seed: int) -> Dict[str, np.ndarray]:
    rng = np.random.default_rng([seed, 0xC0])
    skin = np.array(SKIN_TONES[rng.integers(len(SKIN_TONES))])
    hair = np.array(HAIR_COLORS[rng.integers(len(HAIR_COLORS))])
    shirt = rng.uniform(0.1, 0.9, 3)
    pants = rng.uniform(0.05, 0.5, 3)
    shoes = rng.uniform(0.02, 0.25) * np.ones(3)
    return {"skin": skin, "hair": hair, "shirt": shirt, "pants": pants, "shoes": shoes}


def _check_counts(level_counts: Sequence[int], joint_count: int) -> List[int]:
    counts = [int(c) for c in level_counts]
    if not counts or any(c < 1 for c in counts) or any(b >= a for a, b in zip(counts, counts[1:])):
        raise InvalidCountsError(ERROR_COUNTS_NOT_DECREASING.format(counts))
    if joint_count != SMPL_JOINT_COUNT:
        raise InvalidCountsError(
            f"synthetic humanoids use the {SMPL_JOINT_COUNT}-joint SMPL hierarchy, got {joint_count}"
        )
    return counts


def _build_level(seed: int, level_index: int, count: int, palette) -> LodLevel:
    rng = np.random.default_rng([seed, level_index + 1])
    limbs = _limb_parts()
    p = SMPL_BIND_POSITIONS

    torso_length = float(np.linalg.norm(TORSO_TOP - TORSO_BOTTOM))
    areas = [_capsule_area(torso_length, TORSO_RADII), _ellipsoid_area(HEAD_RADII)]
    areas += [
        _capsule_area(float(np.linalg.norm(np.asarray(part.end) - p[part.start])), part.radii)
        for part in limbs
    ]
    counts = _allocate(count, areas)

    means, normals, tangent_scales, colors, indices, weights = [], [], [], [], [], []

    def add(points, part_normals, part_colors, idx, w, area, n):
        tangent = TANGENT_SCALE_FACTOR * np.sqrt(area / n)
        means.append(points)
        normals.append(part_normals)
        tangent_scales.append(tangent * rng.uniform(0.9, 1.1, n))
        colors.append(part_colors)
        indices.append(idx)
        weights.append(w)

    # torso
    n = int(counts[0])
    if n:
        pts, nrm, _ = _sample_capsule(rng, TORSO_BOTTOM, TORSO_TOP, TORSO_RADII, n)
        idx, w = _spine_weights(pts[:, 1])
        add(pts, nrm, np.tile(palette["shirt"], (n, 1)), idx, w, areas[0], n)

    # head
    n = int(counts[1])
    if n:
        pts, nrm = _sample_ellipsoid(rng, HEAD_CENTER, HEAD_RADII, n)
        hair = (pts[:, 1] > HEAD_CENTER[1] + 0.02) | (pts[:, 2] < HEAD_CENTER[2] - 0.04)
        col = np.where(hair[:, None], palette["hair"], palette["skin"])
        idx = np.full((n, SKIN_INFLUENCES), HEAD_JOINT, dtype=np.int64)
        w = np.zeros((n, SKIN_INFLUENCES))
        w[:, 0] = 1.0
        add(pts, nrm, col, idx, w, areas[1], n)

    for part, n, area in zip(limbs, counts[2:], areas[2:]):
        n = int(n)
        if not n:
            continue
        pts, nrm, s = _sample_capsule(rng, p[part.start], part.end, part.radii, n)
        idx, w = _limb_weights(part, s)
        if part.material == "pants_shoes":
            col = np.where((s > 0.85)[:, None], palette["shoes"], palette["pants"])
        else:
            col = np.tile(palette[part.material], (n, 1))
        add(pts, nrm, col, idx, w, area, n)

    means_arr = np.concatenate(means)
    normal_arr = np.concatenate(normals)
    tangent = np.concatenate(tangent_scales)
    color_arr = np.concatenate(colors) + rng.uniform(-COLOR_NOISE, COLOR_NOISE, (count, 3))
    scales = np.stack([tangent, tangent, NORMAL_SCALE_RATIO * tangent], axis=1)

    return LodLevel(
        canonical_means=means_arr.astype(np.float32),
        rotations=quaternion_rotating_z_to(normal_arr).astype(np.float32),
        scales=scales.astype(np.float32),
        opacities=np.full(count, DEFAULT_TEMPLATE_OPACITY, dtype=np.float32),
        colors=np.clip(color_arr, 0.0, 1.0).astype(np.float32),
        skin_indices=np.concatenate(indices).astype(np.uint16),
        skin_weights=np.concatenate(weights).astype(np.float32),
    )


def generate_synthetic_template(
    seed: int,
    level_counts: Sequence[int],
    joint_count: int = SMPL_JOINT_COUNT,
    template_id: Optional[str] = None,
) -> AvatarTemplate:
    """Deterministic multi-level humanoid; identical seeds give bit-identical arrays"""
    if seed < 0:
        raise InvalidInputError(f"seed must be non-negative, got {seed}")
    counts = _check_counts(level_counts, joint_count)
    palette = _outfit(seed)
    levels = tuple(
        _build_level(seed, index, count, palette) for index, count in enumerate(counts)
    )
    return AvatarTemplate(
        template_id=template_id or f"synthetic_{seed:03d}",
        skeleton=smpl_skeleton(),
        levels=levels,
    )


X_AXIS = np.array([1.0, 0.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])


def _rotation_track(axis: np.ndarray, angles: np.ndarray) -> np.ndarray:
    return quaternion_from_axis_angle(np.broadcast_to(axis, (len(angles), 3)), angles)


def generate_synthetic_motion(
    seed: int,
    frame_count: int = DEFAULT_MOTION_FRAMES,
    fps: float = DEFAULT_MOTION_FPS,
    joint_count: int = SMPL_JOINT_COUNT,
    style: MotionStyle = MotionStyle.WALK,
) -> MotionClip:
    """Looping procedural cycle on the SMPL hierarchy, deterministic in ``seed``"""
    if frame_count < 1:
        raise InvalidCountsError(f"frame_count must be >= 1, got {frame_count}")
    if joint_count != SMPL_JOINT_COUNT:
        raise InvalidCountsError(
            f"synthetic motions use the {SMPL_JOINT_COUNT}-joint SMPL hierarchy, got {joint_count}"
        )
    style = MotionStyle(style)
    rng = np.random.default_rng([seed, 0x30])
    period = rng.uniform(0.9, 1.3)
    amplitude = rng.uniform(0.85, 1.15)
    phase0 = rng.uniform(0.0, 2.0 * np.pi)
    duration = (frame_count - 1) / float(fps)
    if duration > 0.0:
        # even cycle count so the half-rate idle sway also closes at the seam
        cycles = max(2, 2 * round(duration / (2.0 * period)))
        period = duration / cycles

    t = np.arange(frame_count) / float(fps)
    phase = 2.0 * np.pi * t / period + phase0
    swing = np.sin(phase)

    rotations = np.zeros((frame_count, joint_count, 4))
    rotations[:, :, 0] = 1.0
    roots = np.zeros((frame_count, 3))

    def set_track(joint: int, axis: np.ndarray, angles: np.ndarray) -> None:
        rotations[:, joint] = quaternion_multiply(
            rotations[:, joint], _rotation_track(axis, angles)
        )

    if style == MotionStyle.WALK:
        hip = np.radians(25.0) * amplitude
        set_track(1, X_AXIS, -hip * swing)
        set_track(2, X_AXIS, hip * swing)
        set_track(4, X_AXIS, np.radians(40.0) * amplitude * np.maximum(0.0, swing))
        set_track(5, X_AXIS, np.radians(40.0) * amplitude * np.maximum(0.0, -swing))
        set_track(16, X_AXIS, np.radians(20.0) * amplitude * swing)
        set_track(17, X_AXIS, -np.radians(20.0) * amplitude * swing)
        set_track(18, X_AXIS, -np.radians(15.0) * np.ones(frame_count))
        set_track(19, X_AXIS, -np.radians(15.0) * np.ones(frame_count))
        set_track(9, Z_AXIS, np.radians(3.0) * swing)
        roots[:, 1] = 0.02 * amplitude * np.abs(np.cos(phase))
    elif style == MotionStyle.WAVE:
        set_track(17, Z_AXIS, -np.radians(110.0) * np.ones(frame_count))
        set_track(19, Z_AXIS, -np.radians(30.0) * amplitude * (1.0 + np.sin(2.0 * phase)))
        set_track(16, Z_AXIS, np.radians(8.0) * np.ones(frame_count))
        set_track(15, X_AXIS, np.radians(6.0) * swing)
    else:
        set_track(9, Z_AXIS, np.radians(3.0) * amplitude * swing)
        set_track(12, X_AXIS, np.radians(4.0) * np.sin(0.5 * phase))
        set_track(16, Z_AXIS, np.radians(4.0) * swing)
        set_track(17, Z_AXIS, -np.radians(4.0) * swing)
        roots[:, 1] = 0.005 * np.sin(2.0 * phase)

    return MotionClip(
        fps=float(np.float32(fps)),
        root_translations=roots.astype(np.float32),
        rotations=rotations.astype(np.float32),
        name=f"{style.value}_{seed:03d}",
    )
