# Test configuration
import json
import os

# Test environment variables
os.environ.setdefault("GAUSSIAN_CROWD_THREADS", "2")
os.environ.setdefault("LOG_LEVEL", "WARNING")
os.environ.setdefault("BENCH_MEMORY_BUDGET_FRACTION", "0.8")

import numpy as np
import pytest

from gaussian_crowd.avatar.skeleton import MotionClip
from gaussian_crowd.avatar.synthetic import generate_synthetic_motion, generate_synthetic_template
from gaussian_crowd.core.camera import Camera
from gaussian_crowd.formats.motion_file import save_motion
from gaussian_crowd.formats.template_file import save_template

SMALL_COUNTS = (400, 120, 40)


@pytest.fixture(scope="session")
def small_template():
    """Three-level synthetic humanoid small enough for per-test renders"""
    return generate_synthetic_template(3, SMALL_COUNTS, template_id="small")


@pytest.fixture(scope="session")
def walk_clip():
    return generate_synthetic_motion(5, frame_count=30)


@pytest.fixture
def bind_clip():
    """Two-frame clip that never leaves the bind pose"""
    rotations = np.zeros((2, 24, 4), dtype=np.float32)
    rotations[..., 0] = 1.0
    return MotionClip(30.0, np.zeros((2, 3), dtype=np.float32), rotations, name="bind")


@pytest.fixture
def tiny_camera():
    return Camera.look_at((0.0, 1.0, -3.0), (0.0, 1.0, 0.0), width=96, height=64)


@pytest.fixture
def scene_dir(tmp_path, small_template, walk_clip):
    """Directory holding two templates, two motions and a matching scene.json"""
    save_template(small_template, tmp_path / "assets" / "template_a.gsat")
    save_template(
        generate_synthetic_template(4, SMALL_COUNTS), tmp_path / "assets" / "template_b.gsat"
    )
    save_motion(walk_clip, tmp_path / "assets" / "walk.gsmo")
    save_motion(generate_synthetic_motion(6, frame_count=20), tmp_path / "assets" / "walk2.gsmo")
    scene = {
        "templates": ["assets/template_a.gsat", "assets/template_b.gsat"],
        "motions": ["assets/walk.gsmo", "assets/walk2.gsmo"],
        "grid": {"rows": 2, "cols": 3, "spacing_m": 1.0},
        "crowd": {"count": 5, "seed": 11},
        "camera": {"position": [0.0, 1.6, -3.0], "look_at": [0.0, 1.0, 1.0], "width": 80, "height": 48},
    }
    (tmp_path / "scene.json").write_text(json.dumps(scene), encoding="utf-8")
    return tmp_path
