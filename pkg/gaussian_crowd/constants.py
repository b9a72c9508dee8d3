# Gaussian Crowd Constants
# All magic numbers and strings are defined here for maintainability

# Splat Math
LOW_PASS_DILATION_PX2 = 0.3
ALPHA_MAX = 0.99
ALPHA_CUTOFF = 1.0 / 255.0
TRANSMITTANCE_FLOOR = 1e-4
EXTENT_SIGMA = 3.0
QUATERNION_NORM_TOLERANCE = 1e-6
DEFAULT_NEAR_M = 0.01
DEFAULT_FOV_Y_DEG = 60.0

# Rasterizer
DEFAULT_TILE_SIZE = 16
RASTER_CHUNK_SPLATS = 256
DEFAULT_BACKGROUND_RGB = (0.0, 0.0, 0.0)

# Resolution (pixels)
DEFAULT_WIDTH = 1280
DEFAULT_HEIGHT = 720
SWEEP_WIDTH = 640
SWEEP_HEIGHT = 360

# Level of Detail
DEFAULT_LOD_THRESHOLDS_M = (5.0, 10.0)
DEFAULT_HYSTERESIS_M = 0.0
REFERENCE_LOD_COUNTS = (202738, 12661, 3176)

# Avatar
SMPL_JOINT_COUNT = 24
SKIN_INFLUENCES = 4
SKIN_WEIGHT_TOLERANCE = 1e-5
RIGID_TOLERANCE = 1e-5
DEFAULT_TEMPLATE_OPACITY = 0.95
DEFAULT_MOTION_FPS = 30.0
DEFAULT_MOTION_FRAMES = 120

# Crowd
PLACEMENT_JITTER_FRACTION = 0.25
FACING_YAW_JITTER_DEG = 15.0
REFERENCE_TEMPLATE_COUNT = 14

# Memory Layout (bytes per Gaussian)
CHANNEL_BYTES = {
    "mean": 12,
    "rotation": 16,
    "scale": 12,
    "opacity": 4,
    "color": 12,
    "skin_indices": 8,
    "skin_weights": 16,
}
POSED_MEAN_BYTES = 12
MIB = 1024 * 1024

# Metrics
PSNR_CAP_DB = 99.0
PSNR_MAX_VALUE = 1.0
SWEEP_DISTANCES_M = (1.9, 3.0, 5.0, 10.0)

# Benchmark
BENCH_WARMUP_FRAMES = 5
BENCH_TIMED_FRAMES = 30
BENCH_CHARACTER_COUNTS = (1, 100, 400, 1000, 5000)
BENCH_DEFAULT_GAUSSIANS = (3176,)
BENCH_SIMULATION_FPS = 30.0

# File Formats
TEMPLATE_MAGIC = b"GSAT"
MOTION_MAGIC = b"GSMO"
TEMPLATE_VERSION = 1
MOTION_VERSION = 1
PPM_MAX_VALUE = 255

# CLI Exit Codes
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_ASSET_ERROR = 3
EXIT_RUNTIME_ERROR = 4

# Error Messages
ERROR_BAD_MAGIC = "bad magic in {}: expected {!r}, found {!r}"
ERROR_VERSION_MISMATCH = "unsupported {} version {} in {} (expected {})"
ERROR_TRUNCATED = "truncated file {}: section '{}' needs {} bytes at offset {}, {} available"
ERROR_TRAILING_DATA = "trailing data in {}: {} unexpected bytes after offset {}"
ERROR_MISSING_ASSET = "asset not found: {}"
ERROR_CAPACITY = "grid capacity {}x{}={} is smaller than the requested {} instances"
ERROR_COUNTS_NOT_DECREASING = "level counts must be strictly decreasing and >= 1, got {}"
ERROR_JOINT_MISMATCH = "pose has {} joints, skeleton has {}"
ERROR_EMPTY_CLIP = "motion clip has no frames"
ERROR_NON_FINITE = "non-finite values in {}"
ERROR_DIMENSION_MISMATCH = "image dimensions differ: {} vs {}"
ERROR_SWEEP_LEVELS = "template {} has {} level(s); the sweep needs at least 2"

# Log Messages
LOG_TEMPLATE_LOADED = "Loaded template {} ({} levels: {})"
LOG_TEMPLATE_SAVED = "Saved template {} to {}"
LOG_MOTION_LOADED = "Loaded motion {} ({} frames @ {:g} fps)"
LOG_MOTION_SAVED = "Saved motion {} to {}"
LOG_CROWD_BUILT = "Built crowd of {} instances from {} templates and {} motions"
LOG_FRAME_RENDERED = "Rendered frame t={:.3f}s: {} splats in {:.1f} ms"
LOG_CELL_SKIPPED = "Skipped benchmark cell {} x {}: {}"
LOG_UNKNOWN_CONFIG_KEY = "Ignoring unknown scene config key '{}'"
