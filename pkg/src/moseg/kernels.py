"""Backend selection for the hot residual kernels.

Prefers the compiled extension; falls back to the numpy twin when the
extension was not built. Both produce bit-identical output.
"""

import numpy as np

try:
    from . import _kernels as _impl

    HAVE_NATIVE = True
except ImportError:  # pragma: no cover - depends on build environment
    from . import _kernels_py as _impl

    HAVE_NATIVE = False

TRANSFER = 0
EPIPOLAR = 1

native_impl = _impl if HAVE_NATIVE else None


def backend_name():
    return "native" if HAVE_NATIVE else "python"


def sampson_batch(code, model, src, dst, impl=None):
    """Sampson residuals of one 3x3 model over paired point arrays (n, 2)."""
    impl = impl or _impl
    model = np.ascontiguousarray(model, dtype=np.float64)
    src = np.ascontiguousarray(np.atleast_2d(src), dtype=np.float64)
    dst = np.ascontiguousarray(np.atleast_2d(dst), dtype=np.float64)
    out = np.empty(src.shape[0], dtype=np.float64)
    impl.residuals_one(code, model, src, dst, out)
    return out


def fill_residual_matrix(code, matrices, frame_pairs, positions, visibility, impl=None):
    """Residuals of every point against every hypothesis.

    Returns ``(values, missing)`` where ``values`` is (N, K) float64 (NaN at
    missing entries) and ``missing`` is (N, K) bool, true where the point is
    not co-visible in the hypothesis's frame pair.
    """
    impl = impl or _impl
    matrices = np.ascontiguousarray(matrices, dtype=np.float64)
    frame_pairs = np.ascontiguousarray(frame_pairs, dtype=np.int64)
    positions = np.ascontiguousarray(positions, dtype=np.float64)
    vis_u8 = np.ascontiguousarray(visibility, dtype=np.uint8)
    num_pts = positions.shape[0]
    num_hyp = matrices.shape[0]
    values = np.full((num_pts, num_hyp), np.nan, dtype=np.float64)
    missing = np.ones((num_pts, num_hyp), dtype=np.uint8)
    impl.fill_matrix(code, matrices, frame_pairs, positions, vis_u8, values, missing)
    return values, missing.view(bool)
