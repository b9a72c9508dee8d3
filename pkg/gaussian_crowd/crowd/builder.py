"""
Crowd construction: seeded grid placement of template instances.

Templates and motion clips are held once and shared read-only by every instance;
the only per-instance storage is the posed-mean buffer (and, when blended Gaussian
rotations are enabled, a posed-rotation buffer).
"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from gaussian_crowd.avatar.skeleton import MotionClip
from gaussian_crowd.avatar.template import AvatarTemplate
from gaussian_crowd.constants import (
    ERROR_CAPACITY,
    ERROR_JOINT_MISMATCH,
    FACING_YAW_JITTER_DEG,
    LOG_CROWD_BUILT,
    PLACEMENT_JITTER_FRACTION,
)
from gaussian_crowd.core.geometry import yaw_matrix
from gaussian_crowd.errors import (
    CapacityError,
    InvalidInputError,
    JointCountMismatchError,
    MissingAssetError,
)
from gaussian_crowd.lod import LodPolicy
from gaussian_crowd.logger_config import get_crowd_logger
from gaussian_crowd.types import GridConfig, SceneConfig

logger = get_crowd_logger(__name__)

MotionsArg = Union[Mapping[str, MotionClip], Sequence[MotionClip]]


@dataclass(eq=False)
class CrowdInstance:
    instance_id: int
    template_id: str
    position: np.ndarray  # (3,) placement on the ground plane, meters
    yaw: float  # radians about +y
    motion_id: Optional[str] = None
    motion_phase_offset: float = 0.0
    active_lod: Optional[int] = None  # None until the first update
    _means_buffer: Optional[np.ndarray] = field(default=None, repr=False)
    _rotation_buffer: Optional[np.ndarray] = field(default=None, repr=False)
    _active_count: int = field(default=0, repr=False)

    @property
    def rotation(self) -> np.ndarray:
        return yaw_matrix(self.yaw)

    def anchor(self, template: AvatarTemplate) -> np.ndarray:
        """World position of the root joint at bind pose, used for LoD distance"""
        root = template.skeleton.bind_world[0][:3, 3]
        return self.rotation @ root + self.position

    def ensure_buffers(self, max_count: int, with_rotations: bool) -> None:
        """Allocate once at the finest level's size; later levels use a prefix"""
        if self._means_buffer is None or len(self._means_buffer) < max_count:
            self._means_buffer = np.zeros((max_count, 3), dtype=np.float32)
        if with_rotations and (
            self._rotation_buffer is None or len(self._rotation_buffer) < max_count
        ):
            self._rotation_buffer = np.zeros((max_count, 4), dtype=np.float32)

    def activate(self, level: int, count: int, with_rotations: bool) -> None:
        self.active_lod = level
        self._active_count = count
        if not with_rotations:
            self._rotation_buffer = None

    @property
    def posed_means(self) -> np.ndarray:
        """World-space means for the active level, length = its gaussian_count"""
        if self._means_buffer is None:
            return np.zeros((0, 3), dtype=np.float32)
        return self._means_buffer[: self._active_count]

    @property
    def posed_rotations(self) -> Optional[np.ndarray]:
        """World-space Gaussian orientations when rotation blending is on, else None"""
        if self._rotation_buffer is None:
            return None
        return self._rotation_buffer[: self._active_count]

    @property
    def allocated_gaussians(self) -> int:
        return 0 if self._means_buffer is None else len(self._means_buffer)


@dataclass(eq=False)
class Crowd:
    templates: Dict[str, AvatarTemplate]
    motions: Dict[str, MotionClip]
    instances: List[CrowdInstance]
    lod_policy: LodPolicy = field(default_factory=LodPolicy)

    def __post_init__(self):
        for instance in self.instances:
            if instance.template_id not in self.templates:
                raise MissingAssetError(
                    f"instance {instance.instance_id} references unknown template",
                    instance.template_id,
                )
            if instance.motion_id is not None and instance.motion_id not in self.motions:
                raise MissingAssetError(
                    f"instance {instance.instance_id} references unknown motion",
                    instance.motion_id,
                )

    def __len__(self) -> int:
        return len(self.instances)

    def template_of(self, instance: CrowdInstance) -> AvatarTemplate:
        return self.templates[instance.template_id]

    def motion_of(self, instance: CrowdInstance) -> Optional[MotionClip]:
        if instance.motion_id is None:
            return None
        return self.motions[instance.motion_id]

    @classmethod
    def single(
        cls,
        template: AvatarTemplate,
        position=(0.0, 0.0, 0.0),
        yaw: float = np.pi,
        motion: Optional[MotionClip] = None,
        lod_policy: Optional[LodPolicy] = None,
    ) -> "Crowd":
        """One-character crowd, used for isolated renders such as LoD sweeps"""
        motions = {} if motion is None else {motion.name or "motion": motion}
        instance = CrowdInstance(
            instance_id=0,
            template_id=template.template_id,
            position=np.asarray(position, dtype=np.float64),
            yaw=float(yaw),
            motion_id=next(iter(motions), None),
        )
        return cls(
            templates={template.template_id: template},
            motions=motions,
            instances=[instance],
            lod_policy=lod_policy or LodPolicy(),
        )


def _motion_table(motions: MotionsArg) -> Dict[str, MotionClip]:
    if isinstance(motions, Mapping):
        return dict(motions)
    table: Dict[str, MotionClip] = {}
    for index, clip in enumerate(motions):
        key = clip.name or f"motion_{index:02d}"
        if key in table:
            key = f"{key}_{index:02d}"
        table[key] = clip
    return table


def _template_table(templates: Sequence[AvatarTemplate]) -> Dict[str, AvatarTemplate]:
    table: Dict[str, AvatarTemplate] = {}
    for template in templates:
        if template.template_id in table:
            raise InvalidInputError(f"duplicate template id '{template.template_id}'")
        table[template.template_id] = template
    return table


def grid_positions(grid: GridConfig, count: int, rng: np.random.Generator) -> np.ndarray:
    """Row-major cell centres with uniform jitter of up to a quarter cell per axis"""
    index = np.arange(count)
    rows, cols = np.divmod(index, grid.cols)
    x = (cols - (grid.cols - 1) / 2.0) * grid.spacing_m
    z = grid.origin_z_m + rows * grid.spacing_m
    jitter = rng.uniform(
        -PLACEMENT_JITTER_FRACTION, PLACEMENT_JITTER_FRACTION, size=(count, 2)
    ) * grid.spacing_m
    positions = np.zeros((count, 3))
    positions[:, 0] = x + jitter[:, 0]
    positions[:, 2] = z + jitter[:, 1]
    return positions


def build_crowd(
    scene_config: SceneConfig,
    templates: Sequence[AvatarTemplate],
    motions: MotionsArg,
    seed: Optional[int] = None,
) -> Crowd:
    """Place ``scene_config.crowd.count`` instances on the grid.

    Every draw comes from one generator seeded with ``seed`` (or the config's seed),
    in a fixed order, so equal inputs always give equal crowds.
    """
    template_table = _template_table(templates)
    motion_table = _motion_table(motions)
    if not template_table:
        raise MissingAssetError("scene has no templates", "templates")
    if not motion_table:
        raise MissingAssetError("scene has no motions", "motions")

    grid = scene_config.grid
    count = scene_config.crowd.count
    if grid.capacity < count:
        raise CapacityError(ERROR_CAPACITY.format(grid.rows, grid.cols, grid.capacity, count))

    rng = np.random.default_rng(scene_config.crowd.seed if seed is None else seed)
    positions = grid_positions(grid, count, rng)
    yaw_jitter = np.radians(FACING_YAW_JITTER_DEG)
    yaws = np.pi + rng.uniform(-yaw_jitter, yaw_jitter, size=count)

    template_ids = list(template_table)
    motion_ids = list(motion_table)
    # Balanced shuffles: every asset is used once the population reaches its count
    template_pick = rng.permutation(np.arange(count) % len(template_ids))
    motion_pick = rng.permutation(np.arange(count) % len(motion_ids))
    phase_unit = rng.uniform(0.0, 1.0, size=count)

    instances = []
    for i in range(count):
        template = template_table[template_ids[template_pick[i]]]
        motion_id = motion_ids[motion_pick[i]]
        clip = motion_table[motion_id]
        if clip.joint_count != template.skeleton.joint_count:
            raise JointCountMismatchError(
                ERROR_JOINT_MISMATCH.format(clip.joint_count, template.skeleton.joint_count)
            )
        instances.append(
            CrowdInstance(
                instance_id=i,
                template_id=template.template_id,
                position=positions[i],
                yaw=float(yaws[i]),
                motion_id=motion_id,
                motion_phase_offset=float(phase_unit[i] * clip.duration),
            )
        )

    logger.info(
        LOG_CROWD_BUILT.format(count, len(template_ids), len(motion_ids)),
        extra={"instance_count": count, "event_type": "crowd_built"},
    )
    return Crowd(
        templates=template_table,
        motions=motion_table,
        instances=instances,
        lod_policy=LodPolicy.from_config(scene_config.lod),
    )
