"""
Tests for the command-line interface, exit codes and ambient configuration
"""

import csv
import json
import logging

import pytest

from gaussian_crowd import config
from gaussian_crowd.cli import build_arg_parser, frame_file_name, run
from gaussian_crowd.constants import EXIT_ASSET_ERROR, EXIT_CONFIG_ERROR, EXIT_OK, EXIT_RUNTIME_ERROR
from gaussian_crowd.formats.image import read_image
from gaussian_crowd.formats.template_file import load_template
from gaussian_crowd.logger_config import StructuredFormatter
from gaussian_crowd.types import ImageFormat


def _csv_lines(path):
    return path.read_text(encoding="utf-8").splitlines()


class TestGenerators:
    """gen-template and gen-motion"""

    def test_gen_template(self, tmp_path, capsys):
        out = tmp_path / "hero.gsat"
        assert run(["gen-template", "--seed", "1", "--counts", "60,20,5", "--out", str(out)]) == EXIT_OK
        printed = capsys.readouterr().out
        assert "level 0: 60 gaussians" in printed
        assert "level 2: 5 gaussians" in printed
        assert load_template(out).gaussian_counts == (60, 20, 5)

    def test_gen_template_is_reproducible(self, tmp_path):
        for name in ("a.gsat", "b.gsat"):
            assert run(["gen-template", "--seed", "9", "--counts", "30,10", "--out", str(tmp_path / name)]) == 0
        assert (tmp_path / "a.gsat").read_bytes() == (tmp_path / "b.gsat").read_bytes()

    def test_increasing_counts_fail(self, tmp_path):
        code = run(["gen-template", "--counts", "10,20", "--out", str(tmp_path / "bad.gsat")])
        assert code == EXIT_RUNTIME_ERROR
        assert not (tmp_path / "bad.gsat").exists()

    def test_unparseable_counts(self, tmp_path):
        with pytest.raises(SystemExit):
            run(["gen-template", "--counts", "ten", "--out", str(tmp_path / "x.gsat")])

    def test_gen_motion(self, tmp_path, capsys):
        out = tmp_path / "wave.gsmo"
        code = run(["gen-motion", "--seed", "2", "--frames", "12", "--fps", "24", "--style", "wave", "--out", str(out)])
        assert code == EXIT_OK
        assert "12 frames @ 24 fps" in capsys.readouterr().out
        assert out.stat().st_size == 18 + 12 * (3 + 24 * 4) * 4


class TestRenderCommands:
    """render and animate"""

    def test_render(self, scene_dir, tmp_path):
        out = tmp_path / "frame.png"
        assert run(["render", "--scene", str(scene_dir / "scene.json"), "--out", str(out), "--threads", "1"]) == 0
        assert read_image(out).shape == (48, 80, 3)

    def test_render_static_with_blended_rotations(self, scene_dir, tmp_path):
        out = tmp_path / "frame.ppm"
        args = ["render", "--scene", str(scene_dir / "scene.json"), "--out", str(out)]
        assert run(args + ["--mode", "static", "--blend-rotations", "--time", "0.5"]) == 0
        assert out.read_bytes().startswith(b"P6\n80 48\n255\n")

    def test_missing_template_is_an_asset_error(self, scene_dir, tmp_path, caplog):
        (scene_dir / "assets" / "template_b.gsat").unlink()
        with caplog.at_level(logging.ERROR, logger="gaussian_crowd"):
            code = run(["render", "--scene", str(scene_dir / "scene.json"), "--out", str(tmp_path / "f.png")])
        assert code == EXIT_ASSET_ERROR
        assert "template_b.gsat" in caplog.text
        assert not (tmp_path / "f.png").exists()

    def test_missing_scene_is_a_config_error(self, tmp_path):
        code = run(["render", "--scene", str(tmp_path / "nope.json"), "--out", str(tmp_path / "f.png")])
        assert code == EXIT_CONFIG_ERROR

    def test_capacity_is_a_config_error(self, scene_dir, tmp_path):
        scene = json.loads((scene_dir / "scene.json").read_text())
        scene["crowd"]["count"] = 100
        (scene_dir / "big.json").write_text(json.dumps(scene))
        code = run(["render", "--scene", str(scene_dir / "big.json"), "--out", str(tmp_path / "f.png")])
        assert code == EXIT_CONFIG_ERROR

    def test_animate(self, scene_dir, tmp_path):
        out_dir = tmp_path / "frames"
        code = run(
            ["animate", "--scene", str(scene_dir / "scene.json"), "--frames", "3", "--format", "ppm",
             "--out-dir", str(out_dir), "--threads", "2"]
        )
        assert code == EXIT_OK
        assert sorted(p.name for p in out_dir.iterdir()) == ["frame_0000.ppm", "frame_0001.ppm", "frame_0002.ppm"]

    def test_animate_zero_frames_writes_nothing(self, scene_dir, tmp_path):
        out_dir = tmp_path / "frames"
        args = ["animate", "--scene", str(scene_dir / "scene.json"), "--out-dir", str(out_dir)]
        assert run(args + ["--frames", "0"]) == EXIT_OK
        assert not out_dir.exists()
        assert run(args + ["--frames", "-1"]) == EXIT_CONFIG_ERROR

    def test_frame_file_names(self):
        assert frame_file_name(7, 30, ImageFormat.PNG) == "frame_0007.png"
        assert frame_file_name(3, 12000, ImageFormat.PPM) == "frame_00003.ppm"


class TestBenchCommand:
    """bench and its replay"""

    def test_matrix_rows(self, scene_dir, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        code = run(
            ["bench", "--scene", str(scene_dir / "scene.json"), "--matrix", "chars=1,3;motion=on,off;gaussians=40",
             "--repeats", "1", "--warmup", "0", "--threads", "1", "--out", str(out)]
        )
        assert code == EXIT_OK
        lines = _csv_lines(out)
        assert len(lines) == 5
        assert lines[0].startswith("scenario,gaussian_count,instance_count,motion,status")
        assert "40 (w/ motion) x 3" in capsys.readouterr().out

        replayed = tmp_path / "again.csv"
        assert run(["bench", "--replay", str(out), "--out", str(replayed)]) == EXIT_OK
        assert replayed.read_text() == out.read_text()

    def test_needs_scene_or_replay(self, tmp_path):
        assert run(["bench", "--out", str(tmp_path / "b.csv")]) == EXIT_CONFIG_ERROR

    def test_bad_matrix(self, scene_dir, tmp_path):
        code = run(["bench", "--scene", str(scene_dir / "scene.json"), "--matrix", "people=3", "--out", str(tmp_path / "b.csv")])
        assert code == EXIT_CONFIG_ERROR


class TestMemreportCommand:
    def test_grid(self, tmp_path):
        out = tmp_path / "mem.csv"
        assert run(["memreport", "--gaussians", "3176", "--chars", "1,100", "--out", str(out)]) == EXIT_OK
        rows = list(csv.reader(_csv_lines(out)))
        assert rows[0] == ["gaussians", "mode", "chars_1", "chars_100"]
        assert [row[:2] for row in rows[1:]] == [["3,176", "naive"], ["3,176", "shared"]]

    def test_compare_reference_rows(self, tmp_path, capsys):
        code = run(["memreport", "--mode", "shared", "--compare-reference", "--out", str(tmp_path / "m.csv")])
        assert code == EXIT_OK
        printed = capsys.readouterr().out
        assert "12,661 naive" in printed
        assert "MiB/character" in printed
        assert len(_csv_lines(tmp_path / "m.csv")) == 4

    def test_scene_counts(self, scene_dir, tmp_path, capsys):
        out = tmp_path / "mem.csv"
        code = run(["memreport", "--scene", str(scene_dir / "scene.json"), "--chars", "1,10", "--out", str(out)])
        assert code == EXIT_OK
        assert "scene: 5 characters" in capsys.readouterr().out
        assert len(_csv_lines(out)) == 1 + 3 * 2


class TestLodSweepCommand:
    def test_sweep(self, tmp_path, capsys):
        template = tmp_path / "t.gsat"
        assert run(["gen-template", "--counts", "80,20,6", "--out", str(template)]) == EXIT_OK
        out = tmp_path / "sweep.csv"
        code = run(
            ["lod-sweep", "--template", str(template), "--distances", "1.9,10", "--width", "64", "--height", "36",
             "--threads", "1", "--out", str(out)]
        )
        assert code == EXIT_OK
        assert len(_csv_lines(out)) == 1 + 2 * 3
        assert "1.9 m  level 0: 99.00 dB" in capsys.readouterr().out

    def test_single_level_template(self, tmp_path):
        template = tmp_path / "one.gsat"
        assert run(["gen-template", "--counts", "40", "--out", str(template)]) == EXIT_OK
        assert run(["lod-sweep", "--template", str(template), "--out", str(tmp_path / "s.csv")]) == EXIT_RUNTIME_ERROR

    def test_missing_template(self, tmp_path):
        code = run(["lod-sweep", "--template", str(tmp_path / "none.gsat"), "--out", str(tmp_path / "s.csv")])
        assert code == EXIT_ASSET_ERROR


class TestParser:
    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_arg_parser().parse_args([])

    def test_defaults(self):
        args = build_arg_parser().parse_args(["lod-sweep", "--template", "t.gsat", "--out", "s.csv"])
        assert (args.width, args.height) == (640, 360)
        assert args.distances == [1.9, 3.0, 5.0, 10.0]


class TestAmbientConfig:
    """Environment configuration and structured logs"""

    def test_thread_count_from_environment(self, monkeypatch):
        monkeypatch.setattr(config, "GAUSSIAN_CROWD_THREADS", 3)
        assert config.default_thread_count() == 3

    def test_thread_count_fallback(self, monkeypatch):
        monkeypatch.setattr(config, "GAUSSIAN_CROWD_THREADS", 0)
        assert 1 <= config.default_thread_count() <= config.MAX_DEFAULT_THREADS

    def test_structured_formatter(self):
        record = logging.LogRecord("gaussian_crowd.renderer", logging.INFO, __file__, 1, "frame done", None, None)
        record.event_type = "frame_rendered"
        record.elapsed_ms = 4.5
        entry = json.loads(StructuredFormatter().format(record))
        assert entry["message"] == "frame done"
        assert entry["level"] == "INFO"
        assert entry["event_type"] == "frame_rendered"
        assert entry["elapsed_ms"] == 4.5
