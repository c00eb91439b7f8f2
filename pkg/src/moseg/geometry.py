"""Minimal-sample estimation of the three geometric models.

All fits are linear (Hartley-normalized where it matters): exact interpolation
for the 2-D affine map (3 correspondences), normalized DLT for the homography
(4), and the normalized 8-point algorithm with rank-2 truncation for the
fundamental matrix. Residuals are first-order Sampson errors, uniform across
model families so a single adaptive threshold can rank them.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateSampleError, NumericalFailureError

# Relative condition threshold for declaring a minimal sample degenerate.
_COND_RTOL = 1e-12
# Relative gap below which the design null space is treated as >1 dimensional.
_NULLSPACE_RTOL = 1e-10


class ModelKind(enum.Enum):
    AFFINE = "affine"
    HOMOGRAPHY = "homography"
    FUNDAMENTAL = "fundamental"

    @property
    def min_sample_size(self):
        return _MIN_SAMPLE[self]

    @property
    def residual_code(self):
        return kernels.EPIPOLAR if self is ModelKind.FUNDAMENTAL else kernels.TRANSFER


_MIN_SAMPLE = {
    ModelKind.AFFINE: 3,
    ModelKind.HOMOGRAPHY: 4,
    ModelKind.FUNDAMENTAL: 8,
}

# Fixed view order used everywhere downstream (affine, homography, fundamental).
MODEL_ORDER = (ModelKind.AFFINE, ModelKind.HOMOGRAPHY, ModelKind.FUNDAMENTAL)


@dataclass(frozen=True)
class ModelHypothesis:
    """One fitted model bound to an ordered frame pair (f1 < f2).

    ``matrix`` maps frame f1 coordinates to frame f2. Homography and
    fundamental matrices carry unit Frobenius norm; the affine map keeps its
    natural scale with last row exactly [0, 0, 1].
    """

    kind: ModelKind
    frame_pair: tuple
    matrix: np.ndarray
    sample_ids: tuple = ()


def hartley_normalize(points):
    """Similarity transform taking points to zero centroid and RMS radius sqrt(2).

    Returns ``(T, normalized)`` with T the 3x3 similarity such that
    ``normalized = (T @ [x, y, 1])[:2]``.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise DegenerateSampleError("need at least 2 planar points to normalize")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    rms = np.sqrt(np.mean(np.sum(centered**2, axis=1)))
    if rms <= 0.0:
        raise DegenerateSampleError("all points coincide; normalization undefined")
    scale = np.sqrt(2.0) / rms
    transform = np.array(
        [
            [scale, 0.0, -scale * centroid[0]],
            [0.0, scale, -scale * centroid[1]],
            [0.0, 0.0, 1.0],
        ]
    )
    return transform, centered * scale


def _has_collinear_triple(pts):
    n = pts.shape[0]
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            for k in range(j + 1, n):
                u = pts[j] - pts[i]
                v = pts[k] - pts[i]
                cross = u[0] * v[1] - u[1] * v[0]
                scale = max(np.dot(u, u), np.dot(v, v))
                if abs(cross) <= 1e-10 * scale:
                    return True
    return False


def _fix_sign(mat):
    flat = mat.ravel()
    lead = flat[np.argmax(np.abs(flat))]
    return -mat if lead < 0 else mat


def fit_affine(src, dst, frame_pair=(0, 1), sample_ids=()):
    """Exact 2-D affine interpolation of 3 correspondences.

    The returned 3x3 matrix has last row [0, 0, 1]; collinear source points
    (design condition number above 1e12) raise DegenerateSampleError.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    design = np.column_stack([src, np.ones(3)])
    svals = np.linalg.svd(design, compute_uv=False)
    if svals[-1] <= svals[0] * _COND_RTOL:
        raise DegenerateSampleError("collinear source points; affine sample degenerate")
    coeffs = np.linalg.solve(design, dst)  # (3, 2): columns are x- and y-maps
    matrix = np.array(
        [
            [coeffs[0, 0], coeffs[1, 0], coeffs[2, 0]],
            [coeffs[0, 1], coeffs[1, 1], coeffs[2, 1]],
            [0.0, 0.0, 1.0],
        ]
    )
    return ModelHypothesis(ModelKind.AFFINE, tuple(frame_pair), matrix, tuple(sample_ids))


def _homography_design(src, dst):
    rows = np.zeros((2 * src.shape[0], 9))
    for i, ((x, y), (xp, yp)) in enumerate(zip(src, dst)):
        rows[2 * i] = [0.0, 0.0, 0.0, -x, -y, -1.0, yp * x, yp * y, yp]
        rows[2 * i + 1] = [x, y, 1.0, 0.0, 0.0, 0.0, -xp * x, -xp * y, -xp]
    return rows


def fit_homography(src, dst, frame_pair=(0, 1), sample_ids=()):
    """Normalized DLT from 4 correspondences; unit Frobenius norm output."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if _has_collinear_triple(src) or _has_collinear_triple(dst):
        raise DegenerateSampleError("3 of 4 sample points are collinear")
    t_src, src_n = hartley_normalize(src)
    t_dst, dst_n = hartley_normalize(dst)
    design = _homography_design(src_n, dst_n)
    _, svals, vt = np.linalg.svd(design)
    # The 8x9 design has an implicit ninth singular value of zero; the null
    # vector is unique only while the eighth stays well away from it.
    if svals[-1] <= svals[0] * _COND_RTOL:
        raise DegenerateSampleError("homography design matrix is rank deficient")
    if svals[-1] <= svals[0] * _NULLSPACE_RTOL:
        raise NumericalFailureError("homography null space is not 1-dimensional")
    h_norm = vt[-1].reshape(3, 3)
    matrix = np.linalg.inv(t_dst) @ h_norm @ t_src
    matrix = matrix / np.linalg.norm(matrix)
    if abs(np.linalg.det(matrix)) < 1e-12:
        raise NumericalFailureError("estimated homography is singular")
    matrix = _fix_sign(matrix)
    return ModelHypothesis(ModelKind.HOMOGRAPHY, tuple(frame_pair), matrix, tuple(sample_ids))


def _fundamental_design(src, dst):
    x, y = src[:, 0], src[:, 1]
    xp, yp = dst[:, 0], dst[:, 1]
    ones = np.ones_like(x)
    return np.column_stack([xp * x, xp * y, xp, yp * x, yp * y, yp, x, y, ones])


def linear_fundamental(src, dst):
    """Normalized 8-point solution.

    Returns ``(pre, final)``: the denormalized linear solution before rank-2
    truncation and the rank-2, unit-Frobenius result. Rank deficiency of the
    8x9 design (coplanar samples, zero motion) raises DegenerateSampleError.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    t_src, src_n = hartley_normalize(src)
    t_dst, dst_n = hartley_normalize(dst)
    design = _fundamental_design(src_n, dst_n)
    _, svals, vt = np.linalg.svd(design)
    if svals[-1] <= svals[0] * _COND_RTOL:
        raise DegenerateSampleError(
            "fundamental design matrix has rank < 8 (degenerate configuration)"
        )
    f_norm = vt[-1].reshape(3, 3)
    pre = t_dst.T @ f_norm @ t_src
    pre = _fix_sign(pre / np.linalg.norm(pre))

    u, s, v = np.linalg.svd(f_norm)
    f_rank2 = (u * np.array([s[0], s[1], 0.0])) @ v
    final = t_dst.T @ f_rank2 @ t_src
    final = _fix_sign(final / np.linalg.norm(final))
    return pre, final


def fit_fundamental(src, dst, frame_pair=(0, 1), sample_ids=()):
    """Normalized 8-point algorithm with rank-2 enforcement."""
    _, matrix = linear_fundamental(src, dst)
    return ModelHypothesis(ModelKind.FUNDAMENTAL, tuple(frame_pair), matrix, tuple(sample_ids))


_FITTERS = {
    ModelKind.AFFINE: fit_affine,
    ModelKind.HOMOGRAPHY: fit_homography,
    ModelKind.FUNDAMENTAL: fit_fundamental,
}


def fit_model(kind, src, dst, frame_pair=(0, 1), sample_ids=()):
    return _FITTERS[kind](src, dst, frame_pair=frame_pair, sample_ids=sample_ids)


def sampson_residual(hypothesis, src, dst):
    """First-order Sampson error of one correspondence under a hypothesis.

    Epipolar form for fundamental matrices; the two-row algebraic transfer
    form for homographies and affine maps (the affine map is evaluated as the
    3x3 homography it embeds into). Returns +inf when the Sampson denominator
    underflows (point at an epipole).
    """
    res = kernels.sampson_batch(
        hypothesis.kind.residual_code,
        hypothesis.matrix,
        np.asarray(src, dtype=np.float64).reshape(1, 2),
        np.asarray(dst, dtype=np.float64).reshape(1, 2),
    )
    return float(res[0])


def apply_homography(matrix, points):
    """Map (n, 2) points through a 3x3 projective transform."""
    pts = np.asarray(points, dtype=np.float64)
    homo = np.column_stack([pts, np.ones(pts.shape[0])]) @ matrix.T
    return homo[:, :2] / homo[:, 2:3]


def epipolar_algebraic(matrix, src, dst):
    """|dst^T F src| with homogeneous (x, y, 1) coordinates, per point."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    src_h = np.column_stack([src, np.ones(src.shape[0])])
    dst_h = np.column_stack([dst, np.ones(dst.shape[0])])
    return np.abs(np.sum(dst_h * (src_h @ matrix.T), axis=1))
