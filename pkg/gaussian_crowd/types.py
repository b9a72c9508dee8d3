from enum import Enum
from typing import Dict, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from gaussian_crowd.constants import (
    DEFAULT_BACKGROUND_RGB,
    DEFAULT_FOV_Y_DEG,
    DEFAULT_HEIGHT,
    DEFAULT_HYSTERESIS_M,
    DEFAULT_LOD_THRESHOLDS_M,
    DEFAULT_NEAR_M,
    DEFAULT_TILE_SIZE,
    DEFAULT_WIDTH,
    MIB,
)

Vec3 = Tuple[float, float, float]


class RenderMode(str, Enum):
    STATIC = "static"
    ANIMATED = "animated"


class MemoryMode(str, Enum):
    NAIVE = "naive"
    SHARED = "shared"
    BOTH = "both"


class ImageFormat(str, Enum):
    PPM = "ppm"
    PNG = "png"


class CellStatus(str, Enum):
    OK = "ok"
    SKIPPED = "skipped"


class MotionStyle(str, Enum):
    WALK = "walk"
    WAVE = "wave"
    IDLE = "idle"


# Scene configuration (JSON, validated strictly; unknown keys are kept in model_extra
# so the loader can warn about them)


class _SceneSection(BaseModel):
    model_config = ConfigDict(extra="allow", strict=True, frozen=True)


class GridConfig(_SceneSection):
    rows: int = Field(..., ge=1)
    cols: int = Field(..., ge=1)
    spacing_m: float = Field(default=1.0, gt=0.0)
    origin_z_m: float = 0.0

    @property
    def capacity(self) -> int:
        return self.rows * self.cols


class CameraConfig(_SceneSection):
    position: Vec3 = (0.0, 1.6, -3.0)
    look_at: Vec3 = (0.0, 1.0, 0.0)
    fov_y_deg: float = Field(default=DEFAULT_FOV_Y_DEG, gt=0.0, lt=180.0)
    width: int = Field(default=DEFAULT_WIDTH, ge=1)
    height: int = Field(default=DEFAULT_HEIGHT, ge=1)
    near: float = Field(default=DEFAULT_NEAR_M, gt=0.0)


class LodConfig(_SceneSection):
    thresholds_m: Tuple[float, ...] = DEFAULT_LOD_THRESHOLDS_M
    hysteresis_m: float = Field(default=DEFAULT_HYSTERESIS_M, ge=0.0)

    @field_validator("thresholds_m")
    @classmethod
    def validate_thresholds(cls, v):
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("LoD thresholds must be strictly ascending")
        if any(t <= 0.0 for t in v):
            raise ValueError("LoD thresholds must be positive")
        return v


class CrowdConfig(_SceneSection):
    count: int = Field(..., ge=0)
    seed: int = 0


class RenderConfig(_SceneSection):
    background_rgb: Vec3 = DEFAULT_BACKGROUND_RGB
    tile_size: int = Field(default=DEFAULT_TILE_SIZE, ge=1)

    @field_validator("background_rgb")
    @classmethod
    def validate_background(cls, v):
        if any(c < 0.0 for c in v):
            raise ValueError("background components must be non-negative")
        return v


class SceneConfig(_SceneSection):
    templates: List[str] = Field(..., min_length=1)
    motions: List[str] = Field(..., min_length=1)
    grid: GridConfig
    crowd: CrowdConfig
    camera: CameraConfig = Field(default_factory=CameraConfig)
    lod: LodConfig = Field(default_factory=LodConfig)
    render: RenderConfig = Field(default_factory=RenderConfig)


# Reports


class ChannelBytes(BaseModel):
    naive: int
    shared: int


class MemoryReport(BaseModel):
    mode: MemoryMode
    instance_count: int
    naive_bytes: int
    shared_bytes: int
    savings_fraction: float
    naive_marginal_bytes: int
    shared_marginal_bytes: int
    redundant_canonical_bytes: int
    fixed_overhead_bytes: int
    breakdown: Dict[str, ChannelBytes]

    @model_validator(mode="after")
    def check_ordering(self):
        if self.shared_bytes > self.naive_bytes:
            raise ValueError("shared bytes exceed naive bytes")
        return self


class MemoryGridRow(BaseModel):
    gaussian_count: int
    mode: MemoryMode
    label: str
    mib_by_characters: Dict[int, float]


class MemoryGrid(BaseModel):
    character_counts: List[int]
    rows: List[MemoryGridRow]

    def table_header(self) -> List[str]:
        return ["gaussians", "mode", *[f"chars_{n}" for n in self.character_counts]]

    def table_rows(self) -> List[list]:
        return [
            [
                row.label,
                row.mode.value,
                *[row.mib_by_characters[n] for n in self.character_counts],
            ]
            for row in self.rows
        ]


class MemoryFit(BaseModel):
    """Affine model of a memory row: total = overhead + marginal * characters"""

    gaussian_count: int
    mode: MemoryMode
    overhead_mib: float
    marginal_mib: float
    layout_marginal_mib: float = 0.0

    def predict(self, characters: int) -> float:
        return self.overhead_mib + self.marginal_mib * characters

    @property
    def layout_share(self) -> float:
        """Share of the fitted per-character cost the byte layout accounts for"""
        if self.marginal_mib <= 0.0:
            return 0.0
        return self.layout_marginal_mib / self.marginal_mib


class QualityRow(BaseModel):
    distance_m: float
    lod_level: int = Field(..., ge=0)
    gaussian_count: int = Field(..., ge=1)
    psnr_db: float = Field(..., ge=0.0)


class QualityTable(BaseModel):
    template_id: str
    rows: List[QualityRow] = Field(default_factory=list)

    def table_header(self) -> List[str]:
        return ["distance_m", "lod_level", "gaussian_count", "psnr_db"]

    def table_rows(self) -> List[list]:
        return [
            [row.distance_m, row.lod_level, row.gaussian_count, row.psnr_db]
            for row in self.rows
        ]

    def psnr(self, distance_m: float, lod_level: int) -> float:
        for row in self.rows:
            if row.distance_m == distance_m and row.lod_level == lod_level:
                return row.psnr_db
        raise KeyError((distance_m, lod_level))


class StageTimings(BaseModel):
    update_ms: float = 0.0
    gather_ms: float = 0.0
    sort_ms: float = 0.0
    rasterize_ms: float = 0.0

    @property
    def total_ms(self) -> float:
        return self.update_ms + self.gather_ms + self.sort_ms + self.rasterize_ms


class BenchMatrix(BaseModel):
    character_counts: List[int] = Field(..., min_length=1)
    motion_flags: List[bool] = Field(default_factory=lambda: [False, True], min_length=1)
    gaussian_counts: List[int] = Field(default_factory=lambda: [3176], min_length=1)

    @field_validator("character_counts", "gaussian_counts")
    @classmethod
    def validate_positive(cls, v):
        if any(n < 1 for n in v):
            raise ValueError("counts must be >= 1")
        return v


class BenchReport(BaseModel):
    scenario: str
    gaussian_count: int
    instance_count: int
    motion: bool
    status: CellStatus = CellStatus.OK
    skip_reason: str = ""
    stages: StageTimings = Field(default_factory=StageTimings)
    total_ms: float = 0.0
    fps: float = 0.0
    total_splats: int = 0
    surviving_splats: int = 0

    @model_validator(mode="after")
    def check_fps(self):
        if self.status == CellStatus.OK and self.total_ms > 0.0:
            expected = 1000.0 / self.total_ms
            if abs(self.fps - expected) > 1e-4 * max(1.0, expected):
                raise ValueError("fps must equal 1000 / total_ms")
        return self


BENCH_COLUMNS = [
    "scenario",
    "gaussian_count",
    "instance_count",
    "motion",
    "status",
    "skip_reason",
    "update_ms",
    "gather_ms",
    "sort_ms",
    "rasterize_ms",
    "total_ms",
    "fps",
    "total_splats",
    "surviving_splats",
]


class BenchTable(BaseModel):
    reports: List[BenchReport] = Field(default_factory=list)

    def table_header(self) -> List[str]:
        return list(BENCH_COLUMNS)

    def table_rows(self) -> List[list]:
        return [
            [
                r.scenario,
                r.gaussian_count,
                r.instance_count,
                "on" if r.motion else "off",
                r.status.value,
                r.skip_reason,
                r.stages.update_ms,
                r.stages.gather_ms,
                r.stages.sort_ms,
                r.stages.rasterize_ms,
                r.total_ms,
                r.fps,
                r.total_splats,
                r.surviving_splats,
            ]
            for r in self.reports
        ]


def bytes_to_mib(value: int) -> float:
    return value / MIB
