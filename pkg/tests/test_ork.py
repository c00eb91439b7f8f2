"""ORK affinity construction against an independent brute-force oracle."""

import math

import numpy as np
import pytest

from moseg.errors import InvariantViolation
from moseg.geometry import ModelKind
from moseg.hypotheses import ResidualMatrix
from moseg.ork import AffinityMatrix, build_ork, normalize_covisibility, sparsify_epsilon
from moseg.trajectory_io import TrajectorySet


def ork_bruteforce(values, missing, h_fraction):
    """Explicit sort + threshold + dot products, straight from the definition."""
    n, k = values.shape
    indicators = np.zeros((n, k))
    for i in range(n):
        entries = sorted(
            (values[i, c], c) for c in range(k) if not missing[i, c]
        )  # ties broken by hypothesis index
        h = max(int(math.ceil(h_fraction * len(entries) - 1e-9)), 1)
        tau = entries[h - 1][0]
        for value, c in entries:
            if value <= tau:
                indicators[i, c] = 1.0
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            total = 0.0
            for c in range(k):
                if missing[i, c] or missing[j, c]:
                    continue
                total += indicators[i, c] * indicators[j, c]
            out[i, j] = total
    return out


def random_residual_matrix(rng, n, k, missing_rate=0.2):
    values = rng.permutation(n * k).astype(np.float64).reshape(n, k)
    values *= 0.125  # exact scaling; keeps all entries distinct
    missing = rng.random((n, k)) < missing_rate
    for i in range(n):
        if missing[i].all():
            missing[i, rng.integers(k)] = False
    values = values.copy()
    values[missing] = np.nan
    return ResidualMatrix(
        kind=ModelKind.HOMOGRAPHY, values=values, missing=missing, hypotheses=[]
    )


def test_worked_example_from_definition():
    values = np.array([[0.1, 0.4, 0.2, 0.9], [0.3, 0.1, 0.8, 0.2]])
    missing = np.zeros((2, 4), dtype=bool)
    rm = ResidualMatrix(ModelKind.HOMOGRAPHY, values, missing, [])
    affinity = build_ork(rm, h_fraction=0.5)
    # o_i = [1,0,1,0], o_j = [0,1,0,1] -> k_ij = 0, diagonals = 2
    assert affinity.values[0, 1] == 0.0
    assert affinity.values[0, 0] == 2.0
    assert affinity.values[1, 1] == 2.0


def test_identical_residuals_give_maximal_affinity(rng):
    row = rng.permutation(20).astype(np.float64)
    values = np.stack([row, row])
    rm = ResidualMatrix(ModelKind.AFFINE, values, np.zeros((2, 20), bool), [])
    affinity = build_ork(rm, h_fraction=0.25)
    h = math.ceil(0.25 * 20)
    assert affinity.values[0, 1] == h
    assert affinity.values[0, 0] == h


def test_matches_bruteforce_bit_exact(rng):
    for trial in range(20):
        n = int(rng.integers(3, 31))
        k = int(rng.integers(5, 51))
        h_fraction = float(rng.choice([0.1, 0.2, 0.34, 0.5, 1.0]))
        rm = random_residual_matrix(rng, n, k)
        got = build_ork(rm, h_fraction).values
        expected = ork_bruteforce(rm.values, rm.missing, h_fraction)
        assert np.array_equal(got, expected), f"trial {trial} mismatch"


def test_monotone_transform_invariance(rng):
    rm = random_residual_matrix(rng, 15, 30)
    base = build_ork(rm, 0.3).values
    for transform in (lambda d: 2.0 * d, lambda d: d + 1.0, lambda d: d * d):
        mutated = ResidualMatrix(
            rm.kind, transform(rm.values), rm.missing, rm.hypotheses
        )
        assert np.array_equal(build_ork(mutated, 0.3).values, base)


def test_bounds_and_symmetry(rng):
    rm = random_residual_matrix(rng, 12, 25)
    affinity = build_ork(rm, 0.3)
    values = affinity.values
    assert np.array_equal(values, values.T)
    assert (values >= 0).all()
    diag = np.diag(values)
    assert (values <= np.minimum(diag[:, None], diag[None, :])).all()


def test_permutation_equivariance(rng):
    rm = random_residual_matrix(rng, 10, 20)
    perm = rng.permutation(10)
    permuted = ResidualMatrix(rm.kind, rm.values[perm], rm.missing[perm], [])
    direct = build_ork(permuted, 0.3).values
    expected = build_ork(rm, 0.3).values[np.ix_(perm, perm)]
    assert np.array_equal(direct, expected)


def test_all_missing_point_rejected():
    values = np.full((2, 4), np.nan)
    values[0] = [0.1, 0.2, 0.3, 0.4]
    missing = np.array([[False] * 4, [True] * 4])
    rm = ResidualMatrix(ModelKind.AFFINE, values, missing, [])
    with pytest.raises(InvariantViolation, match="point 2"):
        build_ork(rm, 0.5)


# ---------------------------------------------------------------------------
# co-visibility normalization
# ---------------------------------------------------------------------------


def make_traj(visibility):
    visibility = np.asarray(visibility, dtype=bool)
    positions = np.zeros(visibility.shape + (2,))
    positions[~visibility] = np.nan
    return TrajectorySet(positions=positions, visibility=visibility)


def test_covisibility_full_tracks_divides_by_f():
    traj = make_traj(np.ones((3, 5)))
    affinity = AffinityMatrix(ModelKind.AFFINE, np.full((3, 3), 10.0))
    result = normalize_covisibility(affinity, traj)
    assert np.allclose(result.values, 2.0)


def test_covisibility_direct_division():
    vis = np.array([[1, 1, 1, 1, 1, 0, 0, 0, 0, 0],
                    [0, 0, 0, 1, 1, 1, 1, 1, 0, 0]], dtype=bool)
    traj = make_traj(vis)
    values = np.array([[8.0, 10.0], [10.0, 6.0]])
    result = normalize_covisibility(AffinityMatrix(None, values), traj)
    assert result.values[0, 1] == 5.0  # covis = 2 frames
    assert result.values[0, 0] == 8.0 / 5.0
    assert result.values[1, 1] == 6.0 / 5.0


def test_covisibility_vacuous_zero_stays_zero():
    vis = np.array([[1, 1, 0, 0], [0, 0, 1, 1]], dtype=bool)
    traj = make_traj(vis)
    values = np.array([[4.0, 0.0], [0.0, 4.0]])
    result = normalize_covisibility(AffinityMatrix(None, values), traj)
    assert result.values[0, 1] == 0.0


def test_covisibility_inconsistency_raises():
    vis = np.array([[1, 1, 0, 0], [0, 0, 1, 1]], dtype=bool)
    traj = make_traj(vis)
    values = np.array([[4.0, 1.0], [1.0, 4.0]])
    with pytest.raises(InvariantViolation):
        normalize_covisibility(AffinityMatrix(None, values), traj)


# ---------------------------------------------------------------------------
# epsilon sparsification
# ---------------------------------------------------------------------------


def random_symmetric(rng, n):
    mat = rng.uniform(0, 1, (n, n))
    mat = (mat + mat.T) / 2
    np.fill_diagonal(mat, 1.0)
    return mat


def test_sparsify_near_zero_quantile_is_identity(rng):
    values = random_symmetric(rng, 10)
    result = sparsify_epsilon(AffinityMatrix(None, values), 1e-9)
    assert np.array_equal(result.values, values)


def test_sparsify_two_block_ties_unchanged():
    block = np.kron(np.eye(2), np.ones((3, 3)))
    for quantile in (0.25, 0.5, 0.9):
        result = sparsify_epsilon(AffinityMatrix(None, block.copy()), quantile)
        assert np.array_equal(result.values, block)


def test_sparsify_properties_random(rng):
    for _ in range(10):
        values = random_symmetric(rng, 14)
        result = sparsify_epsilon(AffinityMatrix(None, values), 0.5).values
        assert np.array_equal(result, result.T)
        nonzero_before = (values > 0).sum()
        assert (result > 0).sum() <= nonzero_before
        offdiag = result.copy()
        np.fill_diagonal(offdiag, 0.0)
        assert (offdiag.sum(axis=1) > 0).all()  # no row loses all neighbors
        kept = result > 0
        assert np.array_equal(values[kept], result[kept])  # surviving values intact


def test_affinity_save_load_roundtrip(tmp_path, rng):
    values = random_symmetric(rng, 8)
    values[values < 0.4] = 0.0  # some sparsity for the triplet format
    np.fill_diagonal(values, 1.0)
    affinity = AffinityMatrix(ModelKind.AFFINE, values)
    from moseg.ork import load_affinity, save_affinity

    dense = tmp_path / "kernel.txt"
    save_affinity(affinity, dense)
    loaded = load_affinity(dense)
    assert np.abs(loaded.values / np.where(values == 0, 1, values) - np.where(values == 0, 0, 1)).max() < 1e-8

    coo = tmp_path / "kernel.coo"
    save_affinity(affinity, coo)
    loaded = load_affinity(coo)
    assert loaded.values.shape == values.shape
    nonzero = values != 0
    assert np.allclose(loaded.values[nonzero], values[nonzero], rtol=1e-8)
    assert (loaded.values[~nonzero] == 0).all()
