"""Synthetic multi-body scenes and the classification-error harness.

Scenes are rigid point-cloud bodies (plane, box, bar, blob) moving under
per-frame rotations/translations, viewed by a moving pinhole camera, with
Gaussian pixel noise and visibility dropout. Bodies carry structure tags
(motion / plane / patch) so ideal binary affinity matrices can be built for
hierarchy checks. Named benchmark archetypes with committed constants make
acceptance numbers reproducible.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import EvaluationError, InvariantViolation
from .seeding import child_seed, generator
from .spectral import Labeling
from .trajectory_io import TrajectorySet

_MIN_DEPTH = 0.1
_BOUND_FACTOR = 10.0


@dataclass
class RigidBody:
    """One rigid point cloud and its per-frame motion.

    ``rotation_rate`` (radians/frame, about the body center) and
    ``translation_rate`` (world units/frame) accumulate linearly with the
    frame index.
    """

    shape: str  # plane | box | bar | blob
    num_points: int
    center: tuple
    size: tuple
    rotation_axis: tuple = (0.0, 1.0, 0.0)
    rotation_rate: float = 0.0
    translation_rate: tuple = (0.0, 0.0, 0.0)
    tilt_axis: tuple = (1.0, 0.0, 0.0)
    tilt_angle: float = 0.0
    # Bodies sharing a motion_group move rigidly together (e.g. several static
    # structures are one background motion); None means a group of its own.
    motion_group: int | None = None


@dataclass
class CameraSpec:
    focal: float
    principal_point: tuple
    image_size: tuple
    position: tuple = (0.0, 0.0, 0.0)
    rotation_axis: tuple = (0.0, 1.0, 0.0)
    rotation_rate: float = 0.0
    translation_rate: tuple = (0.0, 0.0, 0.0)


@dataclass
class SceneSpec:
    objects: list
    camera: CameraSpec
    num_frames: int
    noise_sigma: float = 0.0
    occlusion_rate: float = 0.0
    min_track_frames: int = 2


@dataclass
class SceneStructure:
    """Per-point structure tags; patch refines plane refines motion."""

    motion_id: np.ndarray
    plane_id: np.ndarray
    patch_id: np.ndarray


def _rotation(axis, angle):
    axis = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(axis)
    if norm == 0 or angle == 0:
        return np.eye(3)
    axis = axis / norm
    skew = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + math.sin(angle) * skew + (1.0 - math.cos(angle)) * (skew @ skew)


def _sample_body(body, rng, plane_offset, patch_offset):
    """Template points in world frame plus (plane, patch) tags."""
    n = body.num_points
    sx, sy, sz = body.size
    if body.shape == "plane":
        u = rng.uniform(-sx / 2, sx / 2, n)
        v = rng.uniform(-sy / 2, sy / 2, n)
        local = np.column_stack([u, v, np.zeros(n)])
        planes = np.full(n, plane_offset)
        patches = patch_offset + (u > 0).astype(np.int64) + 2 * (v > 0).astype(np.int64)
        used_planes, used_patches = 1, 4
    elif body.shape == "bar":
        u = rng.uniform(-sx / 2, sx / 2, n)
        v = rng.uniform(-sy / 2, sy / 2, n)
        local = np.column_stack([u, v, np.zeros(n)])
        planes = np.full(n, plane_offset)
        patches = patch_offset + np.minimum(
            ((u + sx / 2) / sx * 3).astype(np.int64), 2
        )
        used_planes, used_patches = 1, 3
    elif body.shape == "box":
        face = rng.integers(0, 6, n)
        a = rng.uniform(-0.5, 0.5, n)
        b = rng.uniform(-0.5, 0.5, n)
        local = np.zeros((n, 3))
        half = np.array([sx, sy, sz]) / 2
        for i in range(n):
            axis = face[i] // 2
            sign = 1.0 if face[i] % 2 == 0 else -1.0
            other = [ax for ax in range(3) if ax != axis]
            local[i, axis] = sign * half[axis]
            local[i, other[0]] = a[i] * [sx, sy, sz][other[0]]
            local[i, other[1]] = b[i] * [sx, sy, sz][other[1]]
        planes = plane_offset + face
        patches = patch_offset + face
        used_planes, used_patches = 6, 6
    elif body.shape == "blob":
        local = rng.normal(0.0, 1.0, (n, 3)) * (np.array([sx, sy, sz]) / 2)
        planes = plane_offset + np.arange(n)
        patches = patch_offset + np.arange(n)
        used_planes, used_patches = n, n
    else:
        raise InvariantViolation(f"unknown body shape {body.shape!r}")
    if body.tilt_angle:
        local = local @ _rotation(body.tilt_axis, body.tilt_angle).T
    world = local + np.asarray(body.center)
    return world, planes, patches, used_planes, used_patches


def generate_scene(spec, seed):
    """Project a scene to a labeled :class:`TrajectorySet` (see module doc)."""
    traj, _ = generate_scene_with_structure(spec, seed)
    return traj


def generate_scene_with_structure(spec, seed):
    if len(spec.objects) < 1:
        raise InvariantViolation("scene needs at least one body")
    rng = generator(seed, "scene")
    cam = spec.camera
    num_frames = spec.num_frames

    group_of = {}
    motion_params = {}
    for b, body in enumerate(spec.objects):
        key = body.motion_group if body.motion_group is not None else ("own", b)
        if key not in group_of:
            group_of[key] = len(group_of) + 1
        params = (
            tuple(body.rotation_axis),
            body.rotation_rate,
            tuple(body.translation_rate),
        )
        if body.rotation_rate == 0.0:
            params = (None, 0.0, tuple(body.translation_rate))
        if key in motion_params and motion_params[key] != params:
            raise InvariantViolation(
                f"bodies in motion group {key!r} have different motions"
            )
        motion_params[key] = params

    templates, labels, plane_ids, patch_ids = [], [], [], []
    plane_offset = patch_offset = 0
    for b, body in enumerate(spec.objects):
        world, planes, patches, used_planes, used_patches = _sample_body(
            body, rng, plane_offset, patch_offset
        )
        plane_offset += used_planes
        patch_offset += used_patches
        templates.append(world)
        key = body.motion_group if body.motion_group is not None else ("own", b)
        labels.append(np.full(body.num_points, group_of[key], dtype=np.int64))
        plane_ids.append(planes)
        patch_ids.append(patches)
    labels = np.concatenate(labels)
    structure = SceneStructure(
        motion_id=labels.copy(),
        plane_id=np.concatenate(plane_ids),
        patch_id=np.concatenate(patch_ids),
    )

    total = labels.shape[0]
    positions = np.zeros((total, num_frames, 2))
    width, height = cam.image_size
    for f in range(num_frames):
        cam_rot = _rotation(cam.rotation_axis, cam.rotation_rate * f)
        cam_center = np.asarray(cam.position) + f * np.asarray(cam.translation_rate)
        row = 0
        for body, world in zip(spec.objects, templates):
            rot = _rotation(body.rotation_axis, body.rotation_rate * f)
            center = np.asarray(body.center)
            moved = (world - center) @ rot.T + center + f * np.asarray(body.translation_rate)
            in_cam = (moved - cam_center) @ cam_rot  # == cam_rot.T applied per point
            depth = in_cam[:, 2]
            if (depth < _MIN_DEPTH).any():
                raise InvariantViolation(
                    f"body {spec.objects.index(body) + 1} crosses the camera plane "
                    f"at frame {f + 1}"
                )
            n = moved.shape[0]
            positions[row : row + n, f, 0] = cam.focal * in_cam[:, 0] / depth + cam.principal_point[0]
            positions[row : row + n, f, 1] = cam.focal * in_cam[:, 1] / depth + cam.principal_point[1]
            row += n
    span = max(width, height) * _BOUND_FACTOR
    if (np.abs(positions[:, :, 0] - cam.principal_point[0]) > span).any() or (
        np.abs(positions[:, :, 1] - cam.principal_point[1]) > span
    ).any():
        raise InvariantViolation("projection left the generous image bound")

    if spec.noise_sigma > 0:
        positions = positions + rng.normal(0.0, spec.noise_sigma, positions.shape)

    visibility = np.ones((total, num_frames), dtype=bool)
    if spec.occlusion_rate > 0:
        visibility = rng.random((total, num_frames)) >= spec.occlusion_rate
        floor = max(spec.min_track_frames, 2)
        for i in range(total):
            count = int(visibility[i].sum())
            if count < floor:
                hidden = np.where(~visibility[i])[0]
                revive = rng.choice(hidden, size=floor - count, replace=False)
                visibility[i, revive] = True

    positions = positions.copy()
    positions[~visibility] = np.nan
    traj = TrajectorySet(positions=positions, visibility=visibility, labels=labels)
    traj.validate()
    return traj, structure


def ideal_affinity_matrices(structure):
    """Binary same-patch / same-plane / same-motion matrices (A, H, F order)."""

    def equality(ids):
        return (ids[:, None] == ids[None, :]).astype(np.float64)

    return (
        equality(structure.patch_id),
        equality(structure.plane_id),
        equality(structure.motion_id),
    )


def _as_label_array(labeling):
    if isinstance(labeling, Labeling):
        return labeling.labels
    return np.asarray(labeling, dtype=np.int64)


def classification_error(pred, truth):
    """Misclassified fraction under the best cluster-label bijection.

    Optimal assignment on the confusion matrix (padded square when cluster
    counts differ); equals the brute-force minimum over permutations.
    """
    pred = _as_label_array(pred)
    truth = _as_label_array(truth)
    if pred.shape != truth.shape:
        raise EvaluationError(
            f"labelings disagree on size: {pred.shape} vs {truth.shape}"
        )
    n = pred.shape[0]
    if n == 0:
        raise EvaluationError("empty labelings cannot be scored")
    pred_ids = np.unique(pred)
    truth_ids = np.unique(truth)
    side = max(pred_ids.size, truth_ids.size)
    confusion = np.zeros((side, side), dtype=np.int64)
    pred_index = {v: i for i, v in enumerate(pred_ids)}
    truth_index = {v: i for i, v in enumerate(truth_ids)}
    for p, t in zip(pred, truth):
        confusion[truth_index[t], pred_index[p]] += 1
    rows, cols = linear_sum_assignment(-confusion)
    matched = confusion[rows, cols].sum()
    return 1.0 - matched / n


def prevalence_error(truth):
    """Error of assigning every point to the largest ground-truth group."""
    truth = _as_label_array(truth)
    _, counts = np.unique(truth, return_counts=True)
    return 1.0 - counts.max() / truth.shape[0]


@dataclass
class BenchmarkSequence:
    name: str
    trajectories: TrajectorySet
    num_motions: int
    archetype: str
    expected_hard: bool = False
    scene: SceneSpec | None = None
    seed: int = 0


ARCHETYPES = ("hopkins-like", "kt-like", "degenerate-mix", "epipolar-ambiguity")


def _hopkins_like_scene(index, rng):
    # Weak perspective: long focal length, distant shallow scene, camera
    # rotation dominating a small translation.
    num_frames = (10, 14, 18, 24, 30)[index]
    num_motions = (2, 2, 3, 2, 3)[index]
    depth = 60.0
    objects = [
        RigidBody(
            shape="box",
            num_points=60,
            center=(0.0, 0.0, depth),
            size=(26.0, 20.0, 5.0),
            rotation_axis=(0.2, 1.0, 0.1),
            rotation_rate=0.0,
        ),
        RigidBody(
            shape="box",
            num_points=32,
            center=(-6.0, -3.0, depth - 6.0),
            size=(5.0, 4.0, 3.0),
            rotation_axis=(0.0, 1.0, 0.3),
            rotation_rate=0.012,
            translation_rate=(0.22, 0.1, 0.0),
        ),
    ]
    if num_motions == 3:
        objects.append(
            RigidBody(
                shape="blob",
                num_points=26,
                center=(7.0, 4.0, depth - 4.0),
                size=(4.0, 4.0, 2.5),
                rotation_axis=(1.0, 0.2, 0.0),
                rotation_rate=-0.01,
                translation_rate=(-0.18, 0.12, 0.05),
            )
        )
    camera = CameraSpec(
        focal=2800.0,
        principal_point=(320.0, 240.0),
        image_size=(640, 480),
        rotation_axis=(0.1, 1.0, 0.05),
        rotation_rate=0.0035,
        translation_rate=(0.25, 0.02, 0.05),
    )
    return SceneSpec(
        objects=objects,
        camera=camera,
        num_frames=num_frames,
        noise_sigma=0.4,
    ), num_motions


def _kt_like_scene(index, rng):
    # Strong forward translation, deep cluttered background with elongated
    # structures, strong perspective.
    num_frames = (10, 12, 14, 16, 12)[index]
    num_motions = (2, 2, 3, 2, 3)[index]
    objects = [
        RigidBody(  # road surface receding in depth
            shape="plane",
            num_points=40,
            center=(0.0, 2.4, 44.0),
            size=(26.0, 52.0, 0.0),
            tilt_axis=(1.0, 0.0, 0.0),
            tilt_angle=-np.pi / 2 + 0.06,
            motion_group=1,
        ),
        RigidBody(  # elongated rail along the road
            shape="bar",
            num_points=24,
            center=(-6.5, 0.2, 44.0),
            size=(3.0, 52.0, 0.0),
            tilt_axis=(1.0, 0.0, 0.0),
            tilt_angle=-np.pi / 2,
            motion_group=1,
        ),
        RigidBody(  # oncoming vehicle
            shape="box",
            num_points=26,
            center=(3.4, 0.9, 30.0),
            size=(2.2, 1.8, 4.5),
            translation_rate=(0.0, 0.0, -0.6),
        ),
    ]
    if num_motions == 3:
        objects.append(
            RigidBody(  # crossing vehicle
                shape="box",
                num_points=22,
                center=(-3.0, 1.0, 22.0),
                size=(3.8, 1.6, 1.8),
                translation_rate=(0.55, 0.0, 0.1),
            )
        )
    camera = CameraSpec(
        focal=720.0,
        principal_point=(620.0, 187.0),
        image_size=(1242, 375),
        rotation_axis=(0.0, 1.0, 0.0),
        rotation_rate=0.002,
        translation_rate=(0.02, 0.0, 0.9),
    )
    return SceneSpec(
        objects=objects,
        camera=camera,
        num_frames=num_frames,
        noise_sigma=0.5,
        occlusion_rate=0.08,
        min_track_frames=5,
    ), num_motions


def _degenerate_mix_scene(index, rng):
    # Dominant plane plus a few off-plane points (one rigid background) and an
    # independently moving compact body; rotation-dominant camera keeps the
    # epipolar geometry near-degenerate.
    num_frames = (10, 12, 12, 14, 10)[index]
    num_motions = 2
    fg_dir = (
        (-1.0, 0.35, 0.5),
        (1.0, -0.3, 0.4),
        (-0.9, -0.4, 0.3),
        (1.0, 0.3, -0.35),
        (-1.0, 0.2, -0.4),
    )[index]
    fg_center = ((3.2, 1.6, 17.0), (-3.0, 1.2, 18.0), (2.6, -1.8, 17.5),
                 (-2.8, -1.5, 17.0), (3.0, 0.8, 18.5))[index]
    scale = 0.05 / np.linalg.norm(fg_dir)
    objects = [
        RigidBody(  # dominant plane, slanted for depth spread
            shape="plane",
            num_points=70,
            center=(0.0, 0.0, 24.0),
            size=(22.0, 16.0, 0.0),
            tilt_axis=(1.0, 0.0, 0.0),
            tilt_angle=0.5,
            motion_group=1,
        ),
        RigidBody(  # few off-plane points, same (static) rigid background
            shape="blob",
            num_points=8,
            center=(-4.0, -2.5, 19.5),
            size=(2.0, 1.8, 1.6),
            motion_group=1,
        ),
        RigidBody(  # independent slow second motion crossing the plane
            shape="box",
            num_points=28,
            center=fg_center,
            size=(3.0, 2.4, 2.0),
            rotation_axis=(0.0, 1.0, 0.2),
            rotation_rate=0.002,
            translation_rate=tuple(scale * d for d in fg_dir),
        ),
    ]
    camera = CameraSpec(  # rotation-dominant: epipolar geometry near-degenerate
        focal=1000.0,
        principal_point=(320.0, 240.0),
        image_size=(640, 480),
        rotation_axis=(0.15, 1.0, 0.0),
        rotation_rate=0.007,
        translation_rate=(0.02, 0.003, 0.006),
    )
    return SceneSpec(
        objects=objects,
        camera=camera,
        num_frames=num_frames,
        noise_sigma=0.7,
    ), num_motions


def _epipolar_ambiguity_scene(index, rng):
    # Foreground translating parallel to the camera baseline: its image
    # motion stays on the background's epipolar lines, so the fundamental
    # view cannot separate it. Documented hard case.
    num_frames = (10, 12, 12, 14, 10)[index]
    num_motions = 2
    objects = [
        RigidBody(
            shape="box",
            num_points=55,
            center=(0.0, 0.0, 30.0),
            size=(24.0, 16.0, 14.0),
        ),
        RigidBody(
            shape="box",
            num_points=25,
            center=(2.0, 1.0, 16.0),
            size=(3.0, 2.2, 2.2),
            translation_rate=(0.5, 0.0, 0.0),  # parallel to the baseline
        ),
    ]
    camera = CameraSpec(
        focal=900.0,
        principal_point=(320.0, 240.0),
        image_size=(640, 480),
        translation_rate=(0.9, 0.0, 0.0),
    )
    return SceneSpec(
        objects=objects,
        camera=camera,
        num_frames=num_frames,
        noise_sigma=0.5,
    ), num_motions


_SCENE_BUILDERS = {
    "hopkins-like": _hopkins_like_scene,
    "kt-like": _kt_like_scene,
    "degenerate-mix": _degenerate_mix_scene,
    "epipolar-ambiguity": _epipolar_ambiguity_scene,
}

SUITE_SIZE = 5


def make_benchmark_suite(archetype, seed):
    """Five deterministic sequences of the named archetype."""
    if archetype not in _SCENE_BUILDERS:
        raise InvariantViolation(
            f"unknown archetype {archetype!r}; expected one of {ARCHETYPES}"
        )
    builder = _SCENE_BUILDERS[archetype]
    sequences = []
    for i in range(SUITE_SIZE):
        seq_seed = child_seed(seed, archetype, i)
        spec, num_motions = builder(i, generator(seq_seed, "params"))
        traj = generate_scene(spec, seq_seed)
        sequences.append(
            BenchmarkSequence(
                name=f"{archetype}-{i:02d}",
                trajectories=traj,
                num_motions=num_motions,
                archetype=archetype,
                expected_hard=archetype == "epipolar-ambiguity",
                scene=spec,
                seed=seq_seed,
            )
        )
    return sequences


def write_suite(sequences, outdir):
    """Save trajectory files plus a plain-text manifest index."""
    import os

    from .trajectory_io import save_trajectories

    os.makedirs(outdir, exist_ok=True)
    manifest_path = os.path.join(outdir, "manifest.txt")
    lines = []
    for seq in sequences:
        filename = f"{seq.name}.txt"
        save_trajectories(seq.trajectories, os.path.join(outdir, filename))
        lines.append(
            f"{seq.name} {filename} {seq.num_motions} {seq.archetype} "
            f"{'hard' if seq.expected_hard else 'ok'}"
        )
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return manifest_path


def load_suite_manifest(path):
    """Parse a manifest written by :func:`write_suite`."""
    import os

    records = []
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            name, filename, m, archetype, hard = line.split()
            records.append(
                {
                    "name": name,
                    "path": os.path.join(base, filename),
                    "num_motions": int(m),
                    "archetype": archetype,
                    "expected_hard": hard == "hard",
                }
            )
    return records


def synthetic_two_view(num_points, seed, rotation_axis=(0.3, 1.0, 0.2),
                       rotation_angle=0.1, translation=(1.0, 0.2, 0.3),
                       focal=1000.0, principal_point=(320.0, 240.0)):
    """Correspondences from a known camera pair plus the true F.

    Points are drawn in a 3-D box in front of both cameras; the second camera
    is displaced by (R, t). Returns (src, dst, F) with F the ground-truth
    fundamental matrix satisfying dst^T F src = 0.
    """
    rng = generator(seed, "two-view")
    points = np.column_stack(
        [
            rng.uniform(-8.0, 8.0, num_points),
            rng.uniform(-6.0, 6.0, num_points),
            rng.uniform(14.0, 30.0, num_points),
        ]
    )
    rot = _rotation(rotation_axis, rotation_angle)
    t = np.asarray(translation, dtype=np.float64)
    intrinsics = np.array(
        [
            [focal, 0.0, principal_point[0]],
            [0.0, focal, principal_point[1]],
            [0.0, 0.0, 1.0],
        ]
    )

    cam1 = points
    cam2 = points @ rot.T + t
    src = cam1[:, :2] / cam1[:, 2:3] * focal + np.asarray(principal_point)
    dst = cam2[:, :2] / cam2[:, 2:3] * focal + np.asarray(principal_point)

    skew = np.array(
        [
            [0.0, -t[2], t[1]],
            [t[2], 0.0, -t[0]],
            [-t[1], t[0], 0.0],
        ]
    )
    essential = skew @ rot
    k_inv = np.linalg.inv(intrinsics)
    fundamental = k_inv.T @ essential @ k_inv
    fundamental = fundamental / np.linalg.norm(fundamental)
    return src, dst, fundamental
