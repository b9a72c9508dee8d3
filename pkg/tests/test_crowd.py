"""
Tests for crowd construction and the per-frame crowd update
"""

import numpy as np
import pytest

from gaussian_crowd.avatar.synthetic import generate_synthetic_motion, generate_synthetic_template
from gaussian_crowd.core.camera import Camera
from gaussian_crowd.crowd.animation import update_crowd, update_instance
from gaussian_crowd.crowd.builder import Crowd, build_crowd
from gaussian_crowd.errors import CapacityError, JointCountMismatchError, MissingAssetError
from gaussian_crowd.lod import LodPolicy
from gaussian_crowd.types import CrowdConfig, GridConfig, RenderMode, SceneConfig


def _scene(rows: int, cols: int, count: int, seed: int = 0) -> SceneConfig:
    return SceneConfig(
        templates=["unused.gsat"],
        motions=["unused.gsmo"],
        grid=GridConfig(rows=rows, cols=cols),
        crowd=CrowdConfig(count=count, seed=seed),
    )


def _signature(crowd: Crowd):
    return [
        (i.instance_id, i.template_id, tuple(i.position), i.yaw, i.motion_id, i.motion_phase_offset)
        for i in crowd.instances
    ]


@pytest.fixture(scope="module")
def many_templates():
    return [generate_synthetic_template(seed, (30, 12), template_id=f"t{seed:02d}") for seed in range(14)]


@pytest.fixture(scope="module")
def many_motions():
    return [generate_synthetic_motion(seed, frame_count=4) for seed in range(15)]


class TestBuildCrowd:
    """Seeded grid placement"""

    def test_reference_population(self, many_templates, many_motions):
        """3,500 characters over 14 templates and 15 motions use every asset"""
        scene = _scene(50, 70, 3500, seed=7)
        crowd = build_crowd(scene, many_templates, many_motions)
        assert len(crowd) == 3500
        assert {i.template_id for i in crowd.instances} == {t.template_id for t in many_templates}
        assert {i.motion_id for i in crowd.instances} == set(crowd.motions)
        assert len(crowd.motions) == 15

        positions = np.stack([i.position for i in crowd.instances])
        half_width = (70 - 1) / 2.0 + 0.25
        assert np.all(np.abs(positions[:, 0]) <= half_width)
        assert np.all(positions[:, 2] >= -0.25)
        assert np.all(positions[:, 2] <= 49.25)
        assert np.all(positions[:, 1] == 0.0)

    def test_single_instance_in_first_cell(self, small_template, walk_clip):
        crowd = build_crowd(_scene(2, 3, 1), [small_template], [walk_clip])
        instance = crowd.instances[0]
        assert abs(instance.position[0] - (-1.0)) <= 0.25
        assert abs(instance.position[2]) <= 0.25
        assert abs(instance.yaw - np.pi) <= np.radians(15.0)

    def test_deterministic(self, many_templates, many_motions):
        scene = _scene(10, 10, 80, seed=3)
        a = build_crowd(scene, many_templates, many_motions)
        b = build_crowd(scene, many_templates, many_motions)
        assert _signature(a) == _signature(b)

    def test_seed_override(self, many_templates, many_motions):
        scene = _scene(10, 10, 80, seed=3)
        a = build_crowd(scene, many_templates, many_motions)
        b = build_crowd(scene, many_templates, many_motions, seed=4)
        assert _signature(a) != _signature(b)

    def test_phase_within_clip(self, many_templates, many_motions):
        crowd = build_crowd(_scene(10, 10, 100), many_templates, many_motions)
        for instance in crowd.instances:
            clip = crowd.motion_of(instance)
            assert 0.0 <= instance.motion_phase_offset < clip.duration

    def test_capacity(self, small_template, walk_clip):
        with pytest.raises(CapacityError):
            build_crowd(_scene(2, 2, 5), [small_template], [walk_clip])

    def test_requires_motions(self, small_template):
        with pytest.raises(MissingAssetError):
            build_crowd(_scene(2, 2, 1), [small_template], [])

    def test_joint_count_checked(self, small_template):
        from gaussian_crowd.avatar.skeleton import MotionClip

        clip = MotionClip(30.0, np.zeros((2, 3)), np.tile([1.0, 0.0, 0.0, 0.0], (2, 3, 1)))
        with pytest.raises(JointCountMismatchError):
            build_crowd(_scene(2, 2, 1), [small_template], [clip])

    def test_unknown_template_reference(self, small_template):
        crowd = Crowd.single(small_template)
        crowd.instances[0].template_id = "missing"
        with pytest.raises(MissingAssetError):
            Crowd(crowd.templates, crowd.motions, crowd.instances)

    def test_empty_crowd(self, small_template, walk_clip):
        crowd = build_crowd(_scene(1, 1, 0), [small_template], [walk_clip])
        assert len(crowd) == 0


class TestUpdateCrowd:
    """Pose sampling, skinning and LoD per frame"""

    @pytest.fixture
    def camera(self):
        return Camera.look_at((0.0, 1.6, -3.0), (0.0, 1.0, 0.0), width=320, height=180)

    def test_bind_clip_gives_placed_canonical_means(self, small_template, bind_clip, camera):
        crowd = Crowd.single(small_template, position=(0.5, 0.0, 1.0), yaw=2.0, motion=bind_clip)
        update_crowd(crowd, camera, 0.0, threads=1)
        instance = crowd.instances[0]
        level = small_template.levels[instance.active_lod]
        expected = level.canonical_means.astype(np.float64) @ instance.rotation.T + instance.position
        np.testing.assert_allclose(instance.posed_means, expected, atol=1e-5)

    def test_static_vs_animated(self, small_template, walk_clip, camera):
        crowd = Crowd.single(small_template, motion=walk_clip)
        static = update_crowd(crowd, camera, 0.3, mode=RenderMode.STATIC, threads=1)[0].copy()
        animated = update_crowd(crowd, camera, 0.3, mode=RenderMode.ANIMATED, threads=1)[0].copy()
        assert static.shape == animated.shape
        assert not np.allclose(static, animated)

    def test_buffer_follows_lod(self, small_template, walk_clip, camera):
        """Moving from 4 m to 12 m shrinks the buffer to the coarsest level"""
        crowd = Crowd.single(small_template, position=(0.0, 0.0, 0.0), motion=walk_clip)
        instance = crowd.instances[0]
        near_camera = Camera.look_at((0.0, 0.95, -4.0), (0.0, 0.95, 0.0))
        update_crowd(crowd, near_camera, 0.0, threads=1)
        assert instance.active_lod == 0
        assert len(instance.posed_means) == small_template.gaussian_counts[0]

        far_camera = Camera.look_at((0.0, 0.95, -12.0), (0.0, 0.95, 0.0))
        update_crowd(crowd, far_camera, 0.0, threads=1)
        assert instance.active_lod == 2
        assert len(instance.posed_means) == small_template.gaussian_counts[2]
        assert instance.allocated_gaussians == small_template.gaussian_counts[0]

    def test_anchor_is_placed_root_joint(self, small_template, walk_clip):
        crowd = Crowd.single(small_template, position=(1.0, 0.0, 2.0), yaw=np.pi / 2, motion=walk_clip)
        instance = crowd.instances[0]
        root = small_template.skeleton.bind_world[0][:3, 3]
        anchor = instance.anchor(small_template)
        np.testing.assert_allclose(anchor, instance.rotation @ root + instance.position, atol=1e-12)
        assert anchor[1] == pytest.approx(root[1])

    def test_distance_lod_without_override(self, small_template, walk_clip, camera):
        """An instance 12 m past the target falls to the coarsest level"""
        crowd = Crowd.single(small_template, position=(0.0, 0.0, 12.0), motion=walk_clip)
        (posed,) = update_crowd(crowd, camera, 0.0, threads=1)
        assert crowd.instances[0].active_lod == 2
        assert len(posed) == small_template.gaussian_counts[2]

    def test_lod_override(self, small_template, walk_clip, camera):
        crowd = Crowd.single(small_template, motion=walk_clip)
        update_crowd(crowd, camera, 0.0, lod_override=1, threads=1)
        assert crowd.instances[0].active_lod == 1
        update_crowd(crowd, camera, 0.0, lod_override=9, threads=1)
        assert crowd.instances[0].active_lod == 2

    def test_thread_count_does_not_change_results(self, scene_dir, camera):
        from gaussian_crowd.formats.scene_config import load_scene_assets, load_scene_config

        config = load_scene_config(scene_dir / "scene.json")
        templates, motions = load_scene_assets(config)
        results = []
        for threads in (1, 4):
            crowd = build_crowd(config, templates, motions)
            results.append([b.copy() for b in update_crowd(crowd, camera, 0.7, threads=threads)])
        for a, b in zip(*results):
            np.testing.assert_array_equal(a, b)

    def test_template_data_untouched(self, small_template, walk_clip, camera):
        before = small_template.levels[0].canonical_means.copy()
        crowd = Crowd.single(small_template, motion=walk_clip)
        update_crowd(crowd, camera, 0.5, threads=1)
        np.testing.assert_array_equal(small_template.levels[0].canonical_means, before)

    def test_blended_rotations(self, small_template, walk_clip, camera):
        crowd = Crowd.single(small_template, motion=walk_clip)
        instance = crowd.instances[0]
        update_instance(crowd, instance, camera, 0.2, blend_rotations=True)
        rotations = instance.posed_rotations
        assert rotations is not None
        assert rotations.shape == (len(instance.posed_means), 4)
        np.testing.assert_allclose(np.linalg.norm(rotations, axis=1), 1.0, atol=1e-5)

    def test_hysteresis_uses_previous_level(self, small_template, walk_clip):
        crowd = Crowd.single(small_template, motion=walk_clip, lod_policy=LodPolicy((5.0, 10.0), 1.0))
        instance = crowd.instances[0]
        update_crowd(crowd, Camera.look_at((0.0, 0.95, -4.0), (0.0, 0.95, 0.0)), 0.0, threads=1)
        assert instance.active_lod == 0
        update_crowd(crowd, Camera.look_at((0.0, 0.95, -5.3), (0.0, 0.95, 0.0)), 0.0, threads=1)
        assert instance.active_lod == 0
        update_crowd(crowd, Camera.look_at((0.0, 0.95, -5.6), (0.0, 0.95, 0.0)), 0.0, threads=1)
        assert instance.active_lod == 1
