# Gaussian Crowd Package
# Main exports for easy importing

from gaussian_crowd.avatar.skeleton import (
    MotionClip,
    Pose,
    Skeleton,
    forward_kinematics,
    sample_pose,
    smpl_skeleton,
)
from gaussian_crowd.avatar.skinning import skin_means, skin_rotations
from gaussian_crowd.avatar.synthetic import generate_synthetic_motion, generate_synthetic_template
from gaussian_crowd.avatar.template import AvatarTemplate, LodLevel
from gaussian_crowd.core.camera import Camera, camera_from_config
from gaussian_crowd.core.gaussian_math import (
    Gaussian3D,
    Splat2D,
    build_covariance,
    eval_alpha,
    project_gaussian,
    project_gaussians,
)
from gaussian_crowd.crowd.animation import update_crowd, update_instance
from gaussian_crowd.crowd.builder import Crowd, CrowdInstance, build_crowd
from gaussian_crowd.crowd.memory import MemoryLayoutModel, fit_memory_row, memory_grid, memory_report
from gaussian_crowd.formats.image import write_image
from gaussian_crowd.formats.motion_file import load_motion, save_motion
from gaussian_crowd.formats.report import export_report, load_bench_report
from gaussian_crowd.formats.scene_config import load_scene_config, parse_scene_config
from gaussian_crowd.formats.template_file import load_template, save_template
from gaussian_crowd.lod import LodPolicy, select_lod
from gaussian_crowd.metrics.bench import BenchScene, parse_matrix, run_benchmark, run_cell
from gaussian_crowd.metrics.quality import lod_quality_sweep, psnr
from gaussian_crowd.renderer.pipeline import render_frame, render_frame_timed
from gaussian_crowd.renderer.rasterizer import Framebuffer, rasterize, rasterize_reference
from gaussian_crowd.renderer.splats import RenderSettings, gather_splats, sort_splats
from gaussian_crowd.types import (
    BenchMatrix,
    BenchReport,
    BenchTable,
    MemoryGrid,
    MemoryMode,
    MemoryReport,
    QualityTable,
    RenderMode,
    SceneConfig,
)

__all__ = [
    # Core math
    "Camera",
    "camera_from_config",
    "Gaussian3D",
    "Splat2D",
    "build_covariance",
    "eval_alpha",
    "project_gaussian",
    "project_gaussians",
    # Avatars and motion
    "Skeleton",
    "Pose",
    "MotionClip",
    "smpl_skeleton",
    "forward_kinematics",
    "sample_pose",
    "LodLevel",
    "AvatarTemplate",
    "skin_means",
    "skin_rotations",
    "generate_synthetic_template",
    "generate_synthetic_motion",
    # Crowd and LoD
    "Crowd",
    "CrowdInstance",
    "build_crowd",
    "update_crowd",
    "update_instance",
    "LodPolicy",
    "select_lod",
    "MemoryLayoutModel",
    "memory_report",
    "memory_grid",
    "fit_memory_row",
    # Rendering
    "RenderSettings",
    "Framebuffer",
    "gather_splats",
    "sort_splats",
    "rasterize",
    "rasterize_reference",
    "render_frame",
    "render_frame_timed",
    # Metrics
    "psnr",
    "lod_quality_sweep",
    "BenchScene",
    "parse_matrix",
    "run_cell",
    "run_benchmark",
    # Files
    "load_template",
    "save_template",
    "load_motion",
    "save_motion",
    "load_scene_config",
    "parse_scene_config",
    "write_image",
    "export_report",
    "load_bench_report",
    # Types and models
    "SceneConfig",
    "RenderMode",
    "MemoryMode",
    "MemoryReport",
    "MemoryGrid",
    "QualityTable",
    "BenchMatrix",
    "BenchReport",
    "BenchTable",
]
