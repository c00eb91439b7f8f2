"""Ordered residual kernel: residual matrix -> sparsified affinity matrix.

Each point's inlier threshold is chosen adaptively as its h-th smallest
residual, so only the *ordering* of residuals matters. Affinity between two
points is the co-occurrence count of their inlier indicators, normalized by
the number of frames where both points are visible, then sparsified with a
per-row quantile threshold (symmetric AND rule).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation
from .geometry import ModelKind

# Slack keeping binary representation noise in h_fraction from bumping the
# ceil (0.1 * 30 must give 3, not 4).
_CEIL_SLACK = 1e-9


@dataclass
class AffinityMatrix:
    """Symmetric nonnegative N x N affinity for one model family ("view").

    ``kind`` is None for fused kernels. ``meta`` records the parameters that
    produced the matrix (h_fraction, epsilon_quantile, ...).
    """

    kind: ModelKind | None
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def num_points(self):
        return self.values.shape[0]


def inlier_counts(num_valid, h_fraction):
    """Per-point inlier count h_i = ceil(h_fraction * K_i), at least 1."""
    counts = np.ceil(h_fraction * num_valid - _CEIL_SLACK).astype(np.int64)
    return np.maximum(counts, 1)


def build_ork(residuals, h_fraction=0.1):
    """Co-occurrence affinity from adaptive top-h inlier indicators.

    For point i with K_i non-missing residuals, the threshold tau_i is the
    h_i-th smallest of them (h_i = ceil(h_fraction * K_i)); the indicator
    o_i marks non-missing residuals <= tau_i, and k_ij = o_i . o_j (missing
    hypotheses never co-occur because both indicators are zero there).
    """
    if not 0.0 < h_fraction <= 1.0:
        raise InvariantViolation("h_fraction must lie in (0, 1]")
    valid = ~residuals.missing
    num_valid = valid.sum(axis=1)
    if (num_valid == 0).any():
        bad = int(np.argmin(num_valid)) + 1
        raise InvariantViolation(f"point {bad} has no non-missing residuals")
    h_i = inlier_counts(num_valid, h_fraction)

    values = np.where(valid, residuals.values, np.inf)
    order = np.sort(values, axis=1)
    thresholds = order[np.arange(order.shape[0]), h_i - 1]
    indicators = (valid & (values <= thresholds[:, None])).astype(np.float64)
    cooccurrence = indicators @ indicators.T
    return AffinityMatrix(
        kind=residuals.kind,
        values=cooccurrence,
        meta={"h_fraction": h_fraction},
    )


def normalize_covisibility(affinity, traj):
    """Divide k_ij by the number of frames where both i and j are visible."""
    covis = traj.covisibility_counts().astype(np.float64)
    values = affinity.values
    inconsistent = (values > 0) & (covis == 0)
    if inconsistent.any():
        i, j = np.argwhere(inconsistent)[0]
        raise InvariantViolation(
            f"points {i + 1} and {j + 1} share hypotheses but no visible frame"
        )
    normalized = np.divide(values, covis, out=np.zeros_like(values), where=covis > 0)
    return AffinityMatrix(
        kind=affinity.kind,
        values=normalized,
        meta={**affinity.meta, "covisibility_normalized": True},
    )


def sparsify_epsilon(affinity, epsilon_quantile=0.75):
    """Per-row quantile thresholding with a symmetric AND rule.

    Entry (i, j) is zeroed only if it falls below both rows' thresholds; a row
    that would lose its last off-diagonal neighbor keeps its single largest.
    """
    if not 0.0 < epsilon_quantile < 1.0:
        raise InvariantViolation("epsilon_quantile must lie in (0, 1)")
    values = affinity.values
    n = values.shape[0]
    offdiag = ~np.eye(n, dtype=bool)
    positive = (values > 0) & offdiag

    # "lower" order statistic: a quantile near 0 maps to the row minimum, so
    # the threshold is always an actual entry and tiny quantiles are no-ops.
    thresholds = np.full(n, -np.inf)
    for i in range(n):
        row = values[i, positive[i]]
        if row.size:
            thresholds[i] = np.quantile(row, epsilon_quantile, method="lower")

    drop = (
        positive
        & (values < thresholds[:, None])
        & (values < thresholds[None, :])
    )
    result = np.where(drop, 0.0, values)

    # Keep-one-neighbor fallback, applied symmetrically.
    for i in range(n):
        if positive[i].any() and not (result[i] * offdiag[i] > 0).any():
            j = int(np.argmax(np.where(offdiag[i], values[i], -np.inf)))
            result[i, j] = values[i, j]
            result[j, i] = values[j, i]
    return AffinityMatrix(
        kind=affinity.kind,
        values=result,
        meta={**affinity.meta, "epsilon_quantile": epsilon_quantile},
    )


def save_affinity(affinity, path):
    """Dense text matrix (default) or 'i j value' triplets for .coo paths."""
    path = str(path)
    if path.endswith(".coo"):
        rows, cols = np.nonzero(affinity.values)
        with open(path, "w", encoding="utf-8") as fh:
            for i, j in zip(rows, cols):
                fh.write(f"{i} {j} {affinity.values[i, j]:.9g}\n")
    else:
        np.savetxt(path, affinity.values, fmt="%.9g")


def load_affinity(path, kind=None):
    path = str(path)
    if path.endswith(".coo"):
        triplets = np.loadtxt(path, ndmin=2)
        n = int(triplets[:, :2].max()) + 1 if triplets.size else 0
        values = np.zeros((n, n))
        for i, j, v in triplets:
            values[int(i), int(j)] = v
    else:
        values = np.loadtxt(path, ndmin=2)
    return AffinityMatrix(kind=kind, values=values)
