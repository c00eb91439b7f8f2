"""Shared synthetic-scene builders for the test suite."""

import numpy as np
import pytest

from moseg.synthlab import CameraSpec, RigidBody, SceneSpec, generate_scene


def planar_two_motion_spec(noise=0.2, num_frames=8, focal=2600.0, depth=60.0):
    """Two planes under different rigid motions, weak perspective.

    Both motions are homography-exact (each body is a plane) and nearly
    affine-exact (long focal, shallow depth).
    """
    objects = [
        RigidBody(
            shape="plane",
            num_points=45,
            center=(0.0, 0.0, depth),
            size=(22.0, 16.0, 0.0),
            tilt_axis=(1.0, 0.0, 0.0),
            tilt_angle=0.3,
        ),
        RigidBody(
            shape="plane",
            num_points=35,
            center=(-5.0, -3.0, depth - 8.0),
            size=(7.0, 6.0, 0.0),
            tilt_axis=(0.0, 1.0, 0.0),
            tilt_angle=-0.25,
            rotation_axis=(0.1, 1.0, 0.0),
            rotation_rate=0.01,
            translation_rate=(0.3, 0.12, 0.0),
        ),
    ]
    camera = CameraSpec(
        focal=focal,
        principal_point=(320.0, 240.0),
        image_size=(640, 480),
        rotation_axis=(0.0, 1.0, 0.1),
        rotation_rate=0.004,
        translation_rate=(0.3, 0.05, 0.0),
    )
    return SceneSpec(objects=objects, camera=camera, num_frames=num_frames, noise_sigma=noise)


def pure_rotation_spec(noise=0.4, num_frames=8):
    """General-depth background, moving foreground, strictly rotating camera.

    The background's epipolar geometry is undefined (zero baseline), the
    degenerate regime for the fundamental-matrix view.
    """
    objects = [
        RigidBody(
            shape="box",
            num_points=50,
            center=(0.0, 0.0, 26.0),
            size=(20.0, 14.0, 12.0),
        ),
        RigidBody(
            shape="box",
            num_points=30,
            center=(2.5, 1.5, 15.0),
            size=(3.0, 2.5, 2.0),
            rotation_axis=(0.0, 1.0, 0.2),
            rotation_rate=0.01,
            translation_rate=(0.12, 0.05, 0.06),
        ),
    ]
    camera = CameraSpec(
        focal=900.0,
        principal_point=(320.0, 240.0),
        image_size=(640, 480),
        rotation_axis=(0.1, 1.0, 0.0),
        rotation_rate=0.008,
        translation_rate=(0.0, 0.0, 0.0),
    )
    return SceneSpec(objects=objects, camera=camera, num_frames=num_frames, noise_sigma=noise)


def general_two_motion_spec(noise=0.3, num_frames=8):
    """Two deep boxes translating oppositely under a translating camera."""
    objects = [
        RigidBody(
            shape="box",
            num_points=45,
            center=(-3.0, 0.0, 24.0),
            size=(8.0, 7.0, 9.0),
            translation_rate=(0.18, 0.02, 0.0),
        ),
        RigidBody(
            shape="box",
            num_points=40,
            center=(4.0, 1.0, 20.0),
            size=(6.0, 6.0, 7.0),
            translation_rate=(-0.2, -0.04, 0.08),
        ),
    ]
    camera = CameraSpec(
        focal=900.0,
        principal_point=(320.0, 240.0),
        image_size=(640, 480),
        rotation_axis=(0.0, 1.0, 0.0),
        rotation_rate=0.002,
        translation_rate=(0.25, 0.0, 0.1),
    )
    return SceneSpec(objects=objects, camera=camera, num_frames=num_frames, noise_sigma=noise)


@pytest.fixture
def planar_scene():
    spec = planar_two_motion_spec()
    return generate_scene(spec, seed=101), spec


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
