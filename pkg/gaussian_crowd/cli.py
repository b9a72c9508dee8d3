"""
Command-line interface.

Defaults: LoD thresholds 5 m / 10 m, tile size 16 px, resolution 1280x720 (scene
config), LoD sweeps at 640x360 over 1.9, 3, 5 and 10 m.
"""

import argparse
from pathlib import Path
from typing import List, Optional, Sequence

from gaussian_crowd.avatar.synthetic import generate_synthetic_motion, generate_synthetic_template
from gaussian_crowd.constants import (
    BENCH_CHARACTER_COUNTS,
    BENCH_TIMED_FRAMES,
    BENCH_WARMUP_FRAMES,
    DEFAULT_FOV_Y_DEG,
    DEFAULT_MOTION_FPS,
    DEFAULT_MOTION_FRAMES,
    EXIT_ASSET_ERROR,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    EXIT_RUNTIME_ERROR,
    REFERENCE_LOD_COUNTS,
    SWEEP_DISTANCES_M,
    SWEEP_HEIGHT,
    SWEEP_WIDTH,
)
from gaussian_crowd.core.camera import Camera, camera_from_config
from gaussian_crowd.crowd.animation import update_crowd
from gaussian_crowd.crowd.builder import build_crowd
from gaussian_crowd.crowd.memory import (
    REFERENCE_MEMORY_TABLE_MIB,
    MemoryLayoutModel,
    fit_reference_row,
    memory_grid,
    memory_report,
)
from gaussian_crowd.errors import AssetError, ConfigError, GaussianCrowdError
from gaussian_crowd.formats.image import write_image
from gaussian_crowd.formats.motion_file import save_motion
from gaussian_crowd.formats.report import export_report, load_bench_report
from gaussian_crowd.formats.scene_config import load_scene_assets, load_scene_config
from gaussian_crowd.formats.template_file import load_template, save_template
from gaussian_crowd.logger_config import get_crowd_logger
from gaussian_crowd.metrics.bench import BenchScene, parse_matrix, reference_fps, run_benchmark
from gaussian_crowd.metrics.quality import lod_quality_sweep
from gaussian_crowd.renderer.pipeline import render_frame
from gaussian_crowd.renderer.splats import RenderSettings
from gaussian_crowd.types import CellStatus, ImageFormat, MemoryMode, MotionStyle, RenderMode, bytes_to_mib

logger = get_crowd_logger(__name__)


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from e


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from e


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussian-crowd",
        description="Instanced Gaussian-splatting crowd renderer and benchmark harness",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-template", help="Write a synthetic multi-level avatar template (GSAT)")
    p.add_argument("--seed", type=int, default=0, help="Generator seed")
    p.add_argument(
        "--counts",
        type=_int_list,
        default=list(REFERENCE_LOD_COUNTS),
        help="Gaussians per level, strictly decreasing",
    )
    p.add_argument("--out", type=Path, required=True, help="Output .gsat path")

    p = sub.add_parser("gen-motion", help="Write a synthetic looping motion clip (GSMO)")
    p.add_argument("--seed", type=int, default=0, help="Generator seed")
    p.add_argument("--frames", type=int, default=DEFAULT_MOTION_FRAMES, help="Frame count")
    p.add_argument("--fps", type=float, default=DEFAULT_MOTION_FPS, help="Frames per second")
    p.add_argument(
        "--style", choices=[s.value for s in MotionStyle], default=MotionStyle.WALK.value
    )
    p.add_argument("--out", type=Path, required=True, help="Output .gsmo path")

    p = sub.add_parser("render", help="Render one frame of a scene")
    p.add_argument("--scene", type=Path, required=True, help="Scene config (JSON)")
    p.add_argument("--time", type=float, default=0.0, help="Scene time in seconds")
    p.add_argument("--out", type=Path, required=True, help="Output image (.ppm or .png)")
    _add_render_flags(p)

    p = sub.add_parser("animate", help="Render a numbered frame sequence")
    p.add_argument("--scene", type=Path, required=True, help="Scene config (JSON)")
    p.add_argument("--start", type=float, default=0.0, help="Time of the first frame (s)")
    p.add_argument("--frames", type=int, default=30, help="Number of frames")
    p.add_argument("--fps", type=float, default=DEFAULT_MOTION_FPS, help="Output frame rate")
    p.add_argument("--out-dir", type=Path, required=True, help="Directory for frames")
    p.add_argument("--format", choices=[f.value for f in ImageFormat], default=ImageFormat.PNG.value)
    _add_render_flags(p)

    p = sub.add_parser("bench", help="Time the render pipeline over a benchmark matrix")
    p.add_argument("--scene", type=Path, help="Scene config supplying camera, grid and motions")
    p.add_argument(
        "--matrix",
        default="chars=1,100;motion=off,on",
        help='Cells, e.g. "chars=1,100;motion=on,off;gaussians=3176"',
    )
    p.add_argument("--repeats", type=int, default=BENCH_TIMED_FRAMES, help="Timed frames per cell")
    p.add_argument("--warmup", type=int, default=BENCH_WARMUP_FRAMES, help="Warm-up frames per cell")
    p.add_argument("--threads", type=int, default=None, help="Worker threads")
    p.add_argument("--replay", type=Path, help="Re-export an existing bench report instead of running")
    p.add_argument("--out", type=Path, required=True, help="Output CSV")

    p = sub.add_parser("memreport", help="Naive vs shared instancing memory grid")
    p.add_argument("--scene", type=Path, help="Scene whose templates set the Gaussian counts")
    p.add_argument("--mode", choices=[m.value for m in MemoryMode], default=MemoryMode.BOTH.value)
    p.add_argument("--overhead", type=float, default=0.0, help="Fixed overhead in MiB")
    p.add_argument("--chars", type=_int_list, default=list(BENCH_CHARACTER_COUNTS), help="Crowd sizes")
    p.add_argument("--gaussians", type=_int_list, default=None, help="Gaussian counts (no scene)")
    p.add_argument("--compare-reference", action="store_true", help="Print affine fits of the reference rows")
    p.add_argument("--out", type=Path, required=True, help="Output CSV")

    p = sub.add_parser("lod-sweep", help="PSNR of each LoD level against the finest, per distance")
    p.add_argument("--template", type=Path, required=True, help="Template (.gsat) with >= 2 levels")
    p.add_argument("--distances", type=_float_list, default=list(SWEEP_DISTANCES_M), help="Meters")
    p.add_argument("--width", type=int, default=SWEEP_WIDTH)
    p.add_argument("--height", type=int, default=SWEEP_HEIGHT)
    p.add_argument("--fov", type=float, default=DEFAULT_FOV_Y_DEG, help="Vertical field of view (deg)")
    p.add_argument("--threads", type=int, default=None, help="Worker threads")
    p.add_argument("--out", type=Path, required=True, help="Output CSV")
    return parser


def _add_render_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=[m.value for m in RenderMode], default=RenderMode.ANIMATED.value)
    p.add_argument("--threads", type=int, default=None, help="Worker threads")
    p.add_argument("--blend-rotations", action="store_true", help="Rotate Gaussians with their joints")


def _load_scene(path: Path, args):
    config = load_scene_config(path)
    templates, motions = load_scene_assets(config)
    crowd = build_crowd(config, templates, motions)
    settings = RenderSettings.from_config(
        config.render, thread_count=args.threads, blend_rotations=args.blend_rotations
    )
    return config, crowd, settings


def cmd_gen_template(args) -> int:
    template = generate_synthetic_template(args.seed, args.counts, template_id=args.out.stem)
    save_template(template, args.out)
    for index, count in enumerate(template.gaussian_counts):
        print(f"level {index}: {count} gaussians")
    return EXIT_OK


def cmd_gen_motion(args) -> int:
    clip = generate_synthetic_motion(args.seed, args.frames, args.fps, style=MotionStyle(args.style))
    save_motion(clip, args.out)
    print(f"{clip.name}: {clip.frame_count} frames @ {clip.fps:g} fps")
    return EXIT_OK


def cmd_render(args) -> int:
    config, crowd, settings = _load_scene(args.scene, args)
    camera = camera_from_config(config.camera)
    framebuffer = render_frame(crowd, camera, args.time, settings, mode=RenderMode(args.mode))
    write_image(framebuffer, args.out)
    print(f"wrote {args.out} ({framebuffer.width}x{framebuffer.height})")
    return EXIT_OK


def frame_file_name(index: int, frame_count: int, image_format: ImageFormat) -> str:
    digits = max(4, len(str(max(frame_count - 1, 0))))
    return f"frame_{index:0{digits}d}.{image_format.value}"


def cmd_animate(args) -> int:
    if args.frames < 0:
        raise ConfigError("--frames must be >= 0")
    if args.frames == 0:
        return EXIT_OK
    if args.fps <= 0.0:
        raise ConfigError("--fps must be positive")
    config, crowd, settings = _load_scene(args.scene, args)
    camera = camera_from_config(config.camera)
    image_format = ImageFormat(args.format)
    for k in range(args.frames):
        framebuffer = render_frame(
            crowd, camera, args.start + k / args.fps, settings, mode=RenderMode(args.mode)
        )
        write_image(framebuffer, args.out_dir / frame_file_name(k, args.frames, image_format))
    print(f"wrote {args.frames} frames to {args.out_dir}")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.replay is not None:
        export_report(load_bench_report(args.replay), args.out)
        return EXIT_OK
    if args.scene is None:
        raise ConfigError("bench needs --scene unless --replay is given")

    config = load_scene_config(args.scene)
    _, motions = load_scene_assets(config.model_copy(update={"templates": []}))
    prototype = BenchScene(
        scene=config,
        motions=motions,
        template_count=len(config.templates),
        settings=RenderSettings.from_config(config.render, thread_count=args.threads),
        warmup_frames=args.warmup,
        timed_frames=args.repeats,
    )
    table = run_benchmark(parse_matrix(args.matrix), prototype)
    export_report(table, args.out)
    for report in table.reports:
        status = f"{report.fps:.1f} FPS" if report.status == CellStatus.OK else f"skipped ({report.skip_reason})"
        reference = reference_fps(report.scenario, report.instance_count)
        if reference is not None and report.status == CellStatus.OK:
            status += f" (reference {reference:g} FPS)"
        print(f"{report.scenario} x {report.instance_count}: {status}")
    if table.reports and all(r.status == CellStatus.SKIPPED for r in table.reports):
        logger.error("Every benchmark cell was skipped")
        return EXIT_RUNTIME_ERROR
    return EXIT_OK


def cmd_memreport(args) -> int:
    model = MemoryLayoutModel.with_overhead_mib(args.overhead)
    gaussian_counts = args.gaussians or list(REFERENCE_LOD_COUNTS)
    template_count = 1
    if args.scene is not None:
        config = load_scene_config(args.scene)
        templates, motions = load_scene_assets(config)
        gaussian_counts = sorted({c for t in templates for c in t.gaussian_counts}, reverse=True)
        template_count = len(templates)
        crowd = build_crowd(config, templates, motions)
        update_crowd(crowd, camera_from_config(config.camera), 0.0, mode=RenderMode.STATIC)
        report = memory_report(crowd, model)
        print(
            f"scene: {report.instance_count} characters, naive {bytes_to_mib(report.naive_bytes):.1f} MiB, "
            f"shared {bytes_to_mib(report.shared_bytes):.1f} MiB, savings {100.0 * report.savings_fraction:.1f}%"
        )

    grid = memory_grid(gaussian_counts, args.chars, model, MemoryMode(args.mode), template_count)
    export_report(grid, args.out)

    if args.compare_reference:
        for gaussians, mode in REFERENCE_MEMORY_TABLE_MIB:
            fit = fit_reference_row(gaussians, mode)
            print(
                f"{gaussians:,} {mode.value}: overhead {fit.overhead_mib:.1f} MiB, "
                f"{fit.marginal_mib:.3f} MiB/character (layout explains {100.0 * fit.layout_share:.1f}%)"
            )
    return EXIT_OK


def cmd_lod_sweep(args) -> int:
    template = load_template(args.template)
    camera = Camera.look_at(
        (0.0, 1.0, -3.0), (0.0, 1.0, 0.0), fov_y_deg=args.fov, width=args.width, height=args.height
    )
    table = lod_quality_sweep(template, args.distances, camera, RenderSettings(thread_count=args.threads))
    export_report(table, args.out)
    for row in table.rows:
        print(f"{row.distance_m:g} m  level {row.lod_level}: {row.psnr_db:.2f} dB")
    return EXIT_OK


COMMANDS = {
    "gen-template": cmd_gen_template,
    "gen-motion": cmd_gen_motion,
    "render": cmd_render,
    "animate": cmd_animate,
    "bench": cmd_bench,
    "memreport": cmd_memreport,
    "lod-sweep": cmd_lod_sweep,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv`` and run one subcommand, mapping failures to exit codes"""
    args = build_arg_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except AssetError as e:
        logger.error(f"Asset error: {e}")
        return EXIT_ASSET_ERROR
    except GaussianCrowdError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_RUNTIME_ERROR
