"""Single-view spectral clustering: Laplacian, embedding, k-means."""

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_CONFIG
from .errors import IsolatedPointError, NumericalFailureError
from .geometry import ModelKind
from .hypotheses import sample_hypotheses
from .ork import AffinityMatrix, build_ork, normalize_covisibility, sparsify_epsilon
from .seeding import child_seed, generator

_KMEANS_MAX_ITER = 300
_KMEANS_RTOL = 1e-9


@dataclass
class SpectralEmbedding:
    """Orthonormal basis of the M smallest Laplacian eigenvectors."""

    basis: np.ndarray
    eigenvalues: np.ndarray
    view: ModelKind | None = None

    @property
    def projector(self):
        return self.basis @ self.basis.T


@dataclass
class Labeling:
    """Per-point cluster indices in 1..M; ``degenerate`` marks empty clusters."""

    labels: np.ndarray
    degenerate: bool = False

    @property
    def num_points(self):
        return self.labels.shape[0]


def normalized_laplacian(affinity):
    """L = I - D^{-1/2} K D^{-1/2}; raises on zero-degree (isolated) points."""
    values = affinity.values if isinstance(affinity, AffinityMatrix) else np.asarray(affinity)
    degrees = values.sum(axis=1)
    if (degrees <= 0).any():
        bad = int(np.argmin(degrees)) + 1
        raise IsolatedPointError(f"point {bad} has zero degree; cannot normalize Laplacian")
    inv_sqrt = 1.0 / np.sqrt(degrees)
    lap = -(values * inv_sqrt[:, None] * inv_sqrt[None, :])
    np.fill_diagonal(lap, lap.diagonal() + 1.0)
    return (lap + lap.T) / 2.0


def embed(laplacian, num_clusters, view=None):
    """Eigenvectors of the ``num_clusters`` smallest Laplacian eigenvalues.

    Only the spanned subspace is well defined; compare projectors U U^T, not
    the basis itself.
    """
    if num_clusters > laplacian.shape[0]:
        raise NumericalFailureError("cannot embed into more dimensions than points")
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(laplacian)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalFailureError(f"eigendecomposition failed: {exc}") from exc
    basis = eigenvectors[:, :num_clusters]
    values = eigenvalues[:num_clusters]
    # Laplacians are PSD up to roundoff; constrained operators (L - gamma*Q)
    # may carry genuinely negative eigenvalues, which are kept.
    values = np.where((values < 0.0) & (values > -1e-9), 0.0, values)
    return SpectralEmbedding(basis=basis, eigenvalues=values, view=view)


def _kmeans_pp(data, num_clusters, rng):
    n = data.shape[0]
    centers = np.empty((num_clusters, data.shape[1]))
    centers[0] = data[int(rng.integers(n))]
    closest = np.sum((data - centers[0]) ** 2, axis=1)
    for j in range(1, num_clusters):
        total = closest.sum()
        if total <= 0.0:
            idx = int(np.argmax(closest))
        else:
            u = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(closest), u, side="right"))
            idx = min(idx, n - 1)
        centers[j] = data[idx]
        closest = np.minimum(closest, np.sum((data - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(data, num_clusters, rng):
    n = data.shape[0]
    centers = _kmeans_pp(data, num_clusters, rng)
    labels = np.zeros(n, dtype=np.int64)
    prev_inertia = None
    inertia = 0.0
    for _ in range(_KMEANS_MAX_ITER):
        dist2 = ((data[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = dist2.argmin(axis=1)
        point_d2 = dist2[np.arange(n), labels]
        for c in range(num_clusters):
            if not (labels == c).any():
                far = int(np.argmax(point_d2))
                if point_d2[far] > 0.0:
                    centers[c] = data[far]
                    labels[far] = c
                    point_d2[far] = 0.0
        inertia = float(point_d2.sum())
        if prev_inertia is not None and abs(prev_inertia - inertia) <= _KMEANS_RTOL * max(
            abs(prev_inertia), 1e-12
        ):
            break
        prev_inertia = inertia
        for c in range(num_clusters):
            mask = labels == c
            if mask.any():
                centers[c] = data[mask].mean(axis=0)
    degenerate = any(not (labels == c).any() for c in range(num_clusters))
    return labels, inertia, degenerate


def cluster_kmeans(embedding, num_clusters, restarts=20, seed=0):
    """Seeded k-means++ on L2-normalized embedding rows, best of ``restarts``.

    Empty clusters are re-seeded from the farthest point when that helps; if
    the data cannot fill every cluster the labeling is flagged degenerate.
    """
    data = embedding.basis if isinstance(embedding, SpectralEmbedding) else np.asarray(embedding)
    norms = np.linalg.norm(data, axis=1, keepdims=True)
    normalized = np.divide(data, norms, out=np.zeros_like(data), where=norms > 0)
    best = None
    for r in range(restarts):
        rng = generator(seed, "kmeans", r)
        labels, inertia, degenerate = _lloyd(normalized, num_clusters, rng)
        if best is None or inertia < best[0]:
            best = (inertia, labels, degenerate)
    return Labeling(labels=best[1] + 1, degenerate=best[2])


def build_view_affinity(traj, kind, config=DEFAULT_CONFIG):
    """Hypothesize -> ORK -> co-visibility normalize -> sparsify, one view."""
    budget = config.resolve_budget(traj.num_frames)
    residuals = sample_hypotheses(traj, kind, budget, config.seed)
    affinity = build_ork(residuals, config.h_fraction)
    affinity = normalize_covisibility(affinity, traj)
    return sparsify_epsilon(affinity, config.epsilon_quantile)


def segment_single_view(traj, kind, num_motions, config=DEFAULT_CONFIG):
    """Full single-view pipeline from trajectories to a labeling."""
    affinity = build_view_affinity(traj, kind, config)
    laplacian = normalized_laplacian(affinity)
    embedding = embed(laplacian, num_motions, view=kind)
    return cluster_kmeans(
        embedding,
        num_motions,
        restarts=config.restarts,
        seed=child_seed(config.seed, "single-view", kind.value),
    )
