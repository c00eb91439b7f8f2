import numpy as np
import pytest

from moseg.errors import DegenerateSampleError
from moseg.geometry import (
    ModelKind,
    apply_homography,
    epipolar_algebraic,
    fit_affine,
    fit_fundamental,
    fit_homography,
    hartley_normalize,
    linear_fundamental,
    sampson_residual,
)
from moseg.synthlab import synthetic_two_view


def align_sign(candidate, reference):
    idx = np.argmax(np.abs(reference))
    if np.sign(candidate.flat[idx]) != np.sign(reference.flat[idx]):
        return -candidate
    return candidate


def random_homography(rng):
    # Mild projective perturbation of a similarity; well conditioned.
    angle = rng.uniform(-0.4, 0.4)
    scale = rng.uniform(0.8, 1.25)
    mat = np.array(
        [
            [scale * np.cos(angle), -scale * np.sin(angle), rng.uniform(-20, 20)],
            [scale * np.sin(angle), scale * np.cos(angle), rng.uniform(-20, 20)],
            [rng.uniform(-1e-4, 1e-4), rng.uniform(-1e-4, 1e-4), 1.0],
        ]
    )
    return mat / np.linalg.norm(mat)


def spread_quad(rng):
    base = np.array([(5.0, 5.0), (120.0, 12.0), (110.0, 115.0), (8.0, 100.0)])
    return base + rng.uniform(-4, 4, (4, 2))


# ---------------------------------------------------------------------------
# hartley_normalize
# ---------------------------------------------------------------------------


def test_hartley_fixed_point():
    pts = np.array([(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]) * np.sqrt(2)
    transform, normalized = hartley_normalize(pts)
    assert np.allclose(transform, np.eye(3))
    assert np.allclose(normalized, pts)


def test_hartley_two_points_formula():
    transform, normalized = hartley_normalize([(0.0, 0.0), (2.0, 0.0)])
    root2 = np.sqrt(2.0)
    assert np.allclose(normalized, [(-root2, 0.0), (root2, 0.0)])
    assert np.allclose(transform @ (1.0, 0.0, 1.0), (0.0, 0.0, 1.0))


def test_hartley_coincident_points_error():
    with pytest.raises(DegenerateSampleError):
        hartley_normalize([(3.0, 3.0)] * 4)


def test_hartley_postconditions(rng):
    pts = rng.uniform(0, 640, (25, 2))
    _, normalized = hartley_normalize(pts)
    assert np.allclose(normalized.mean(axis=0), 0.0, atol=1e-12)
    rms = np.sqrt(np.mean(np.sum(normalized**2, axis=1)))
    assert abs(rms - np.sqrt(2.0)) < 1e-12


# ---------------------------------------------------------------------------
# fit_affine
# ---------------------------------------------------------------------------


def test_affine_identity_and_translation():
    src = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
    hyp = fit_affine(src, src)
    assert np.allclose(hyp.matrix, np.eye(3), atol=1e-12)

    shifted = [(2.0, 3.0), (3.0, 3.0), (2.0, 4.0)]
    hyp = fit_affine(src, shifted)
    expected = np.array([[1.0, 0.0, 2.0], [0.0, 1.0, 3.0], [0.0, 0.0, 1.0]])
    assert np.allclose(hyp.matrix, expected, atol=1e-12)
    assert tuple(hyp.matrix[2]) == (0.0, 0.0, 1.0)


def test_affine_collinear_raises():
    with pytest.raises(DegenerateSampleError):
        fit_affine([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)], [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])


def test_affine_interpolates_exactly(rng):
    for _ in range(20):
        src = rng.uniform(0, 500, (3, 2))
        dst = rng.uniform(0, 500, (3, 2))
        try:
            hyp = fit_affine(src, dst)
        except DegenerateSampleError:
            continue
        mapped = apply_homography(hyp.matrix, src)
        assert np.abs(mapped - dst).max() < 1e-9


# ---------------------------------------------------------------------------
# fit_homography
# ---------------------------------------------------------------------------


def test_homography_identity_square():
    pts = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    hyp = fit_homography(pts, pts)
    ident = np.eye(3) / np.linalg.norm(np.eye(3))
    assert np.abs(align_sign(hyp.matrix, ident) - ident).max() < 1e-9


def test_homography_recovers_generator(rng):
    for _ in range(25):
        truth = random_homography(rng)
        src = spread_quad(rng)
        dst = apply_homography(truth, src)
        hyp = fit_homography(src, dst)
        got = align_sign(hyp.matrix, truth)
        assert np.abs(got - truth).max() < 1e-6
        assert abs(np.linalg.norm(hyp.matrix) - 1.0) < 1e-12


def test_homography_collinear_raises():
    src = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (0.0, 5.0)]
    dst = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    with pytest.raises(DegenerateSampleError):
        fit_homography(src, dst)


def test_homography_sample_residual_tiny(rng):
    truth = random_homography(rng)
    src = spread_quad(rng)
    dst = apply_homography(truth, src)
    hyp = fit_homography(src, dst)
    for s, d in zip(src, dst):
        assert sampson_residual(hyp, s, d) < 1e-9


# ---------------------------------------------------------------------------
# fit_fundamental
# ---------------------------------------------------------------------------


def test_fundamental_recovers_true_matrix():
    for seed in range(10):
        src, dst, truth = synthetic_two_view(8, seed=seed)
        hyp = fit_fundamental(src, dst)
        got = align_sign(hyp.matrix, truth)
        assert np.abs(got - truth).max() < 1e-5
        svals = np.linalg.svd(hyp.matrix, compute_uv=False)
        assert svals[2] < 1e-12  # rank exactly 2
        assert abs(np.linalg.norm(hyp.matrix) - 1.0) < 1e-12


def test_fundamental_pretruncation_sample_residual():
    src, dst, _ = synthetic_two_view(8, seed=3)
    pre, _ = linear_fundamental(src, dst)
    assert epipolar_algebraic(pre, src, dst).max() < 1e-6


def test_fundamental_coplanar_degenerate(rng):
    # 8 points on a world plane: homography-related views, F not unique.
    grid = np.array([(u, v) for u in (0.0, 40.0, 80.0, 120.0) for v in (0.0, 60.0)])
    truth = random_homography(rng)
    dst = apply_homography(truth, grid)
    with pytest.raises(DegenerateSampleError):
        fit_fundamental(grid, dst)


def test_fundamental_zero_motion_degenerate_or_skew(rng):
    pts = rng.uniform(0, 300, (8, 2))
    try:
        hyp = fit_fundamental(pts, pts)
    except DegenerateSampleError:
        return
    assert epipolar_algebraic(hyp.matrix, pts, pts).max() < 1e-6


def test_fundamental_sampson_zero_on_inliers():
    src, dst, _ = synthetic_two_view(8, seed=11)
    hyp = fit_fundamental(src, dst)
    for s, d in zip(src, dst):
        assert sampson_residual(hyp, s, d) < 1e-9


# ---------------------------------------------------------------------------
# sampson_residual
# ---------------------------------------------------------------------------


def test_sampson_hand_value_identity_homography():
    from moseg.geometry import ModelHypothesis

    hyp = ModelHypothesis(ModelKind.HOMOGRAPHY, (0, 1), np.eye(3))
    assert sampson_residual(hyp, (0.0, 0.0), (1.0, 0.0)) == pytest.approx(0.5, abs=1e-14)


def test_sampson_separates_other_motion():
    # residual of a second-motion point exceeds inlier residuals in >= 95%
    # of random draws
    wins = 0
    trials = 40
    for seed in range(trials):
        src, dst, _ = synthetic_two_view(12, seed=seed)
        hyp = fit_fundamental(src[:8], dst[:8])
        inlier_res = [sampson_residual(hyp, s, d) for s, d in zip(src[8:], dst[8:])]
        # displace one correspondence off the epipolar surface (independent motion)
        rng = np.random.default_rng(seed)
        off = dst[9] + rng.uniform(4.0, 10.0, 2) * rng.choice([-1.0, 1.0], 2)
        outlier_res = sampson_residual(hyp, src[9], off)
        if outlier_res > max(inlier_res):
            wins += 1
    assert wins >= 0.95 * trials


def test_sampson_nonnegative_random(rng):
    from moseg.geometry import ModelHypothesis

    for _ in range(50):
        mat = rng.normal(size=(3, 3))
        for kind in (ModelKind.HOMOGRAPHY, ModelKind.FUNDAMENTAL):
            hyp = ModelHypothesis(kind, (0, 1), mat)
            res = sampson_residual(hyp, rng.uniform(0, 100, 2), rng.uniform(0, 100, 2))
            assert res >= 0.0


# ---------------------------------------------------------------------------
# similarity invariance
# ---------------------------------------------------------------------------


def similarity(rng):
    angle = rng.uniform(-np.pi, np.pi)
    scale = rng.uniform(0.5, 2.0)
    t = rng.uniform(-50, 50, 2)
    return np.array(
        [
            [scale * np.cos(angle), -scale * np.sin(angle), t[0]],
            [scale * np.sin(angle), scale * np.cos(angle), t[1]],
            [0.0, 0.0, 1.0],
        ]
    )


def normalized(mat):
    mat = mat / np.linalg.norm(mat)
    lead = mat.flat[np.argmax(np.abs(mat))]
    return -mat if lead < 0 else mat  # canonical sign: max-abs entry positive


def test_homography_fitting_similarity_invariance(rng):
    for _ in range(10):
        truth = random_homography(rng)
        src = spread_quad(rng)
        dst = apply_homography(truth, src)
        s_src, s_dst = similarity(rng), similarity(rng)
        fitted = fit_homography(apply_homography(s_src, src), apply_homography(s_dst, dst))
        conjugated = s_dst @ fit_homography(src, dst).matrix @ np.linalg.inv(s_src)
        assert np.abs(normalized(fitted.matrix) - normalized(conjugated)).max() < 1e-6


def test_fundamental_fitting_similarity_invariance(rng):
    src, dst, _ = synthetic_two_view(8, seed=21)
    s_src, s_dst = similarity(rng), similarity(rng)
    fitted = fit_fundamental(apply_homography(s_src, src), apply_homography(s_dst, dst))
    conjugated = (
        np.linalg.inv(s_dst).T @ fit_fundamental(src, dst).matrix @ np.linalg.inv(s_src)
    )
    assert np.abs(normalized(fitted.matrix) - normalized(conjugated)).max() < 1e-6


def test_affine_fitting_similarity_invariance(rng):
    for _ in range(10):
        src = rng.uniform(0, 300, (3, 2))
        dst = rng.uniform(0, 300, (3, 2))
        try:
            base = fit_affine(src, dst)
        except DegenerateSampleError:
            continue
        s_src, s_dst = similarity(rng), similarity(rng)
        fitted = fit_affine(apply_homography(s_src, src), apply_homography(s_dst, dst))
        conjugated = s_dst @ base.matrix @ np.linalg.inv(s_src)
        # affine scale is pinned by the [0,0,1] row, so compare directly
        assert np.abs(fitted.matrix - conjugated).max() < 1e-6


def test_homography_sample_transfer_error(rng):
    for _ in range(10):
        truth = random_homography(rng)
        src = spread_quad(rng)
        dst = apply_homography(truth, src)
        hyp = fit_homography(src, dst)
        transfer = apply_homography(hyp.matrix, src)
        assert np.abs(transfer - dst).max() < 1e-7
