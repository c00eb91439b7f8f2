"""Multi-view fusion of the three model-family affinity matrices.

Three schemes, increasing in structure: kernel addition (one common
embedding), pairwise co-regularization (penalize disagreement between
per-view embedding projectors), and subset-constrained clustering (exploit
the affine <= homography <= fundamental inlier hierarchy through signed
constraint matrices rebuilt from the evolving embeddings).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_CONFIG
from .errors import InvariantViolation
from .geometry import MODEL_ORDER
from .ork import AffinityMatrix
from .seeding import child_seed
from .spectral import (
    Labeling,
    build_view_affinity,
    cluster_kmeans,
    embed,
    normalized_laplacian,
)

_COUPLING_WARN_LEVEL = 1e-1


@dataclass
class ViewSet:
    """The three views in fixed order (affine, homography, fundamental)."""

    affinities: list
    laplacians: list
    embeddings: list
    num_motions: int

    @property
    def num_views(self):
        return len(self.affinities)

    @property
    def num_points(self):
        return self.affinities[0].num_points

    @classmethod
    def from_affinities(cls, affinities, num_motions):
        if any(a.num_points != affinities[0].num_points for a in affinities):
            raise InvariantViolation("views disagree on the number of points")
        laplacians = [normalized_laplacian(a) for a in affinities]
        embeddings = [
            embed(lap, num_motions, view=aff.kind)
            for lap, aff in zip(laplacians, affinities)
        ]
        return cls(affinities, laplacians, embeddings, num_motions)


def build_views(traj, num_motions, config=DEFAULT_CONFIG):
    """One affinity per model family, sharing the trajectory set and seed."""
    affinities = [build_view_affinity(traj, kind, config) for kind in MODEL_ORDER]
    return ViewSet.from_affinities(affinities, num_motions)


def fused_kernel(views, rescale=True):
    """Sum of per-view kernels, each first scaled to unit max entry."""
    total = np.zeros_like(views.affinities[0].values)
    for aff in views.affinities:
        peak = aff.values.max()
        if rescale and peak > 0:
            total = total + aff.values / peak
        else:
            total = total + aff.values
    return AffinityMatrix(kind=None, values=total, meta={"fused": "kernel-addition"})


def fuse_kernel_addition(views, config=DEFAULT_CONFIG):
    """Kernel addition: spectral clustering of the summed affinity."""
    fused = fused_kernel(views, rescale=config.kernel_rescale)
    laplacian = normalized_laplacian(fused)
    embedding = embed(laplacian, views.num_motions)
    return cluster_kmeans(
        embedding,
        views.num_motions,
        restarts=config.restarts,
        seed=child_seed(config.seed, "fused-kmeans", "keradd"),
    )


@dataclass
class FusionResult:
    """Outcome of an alternating fusion: labeling, per-view bases, trace."""

    labeling: Labeling
    embeddings: list
    trace: list
    converged: bool


def _trace_terms(laplacians, bases):
    return [float(np.trace(u.T @ lap @ u)) for lap, u in zip(laplacians, bases)]


def _coupling_term(bases):
    # Pairwise projector agreement, each unordered pair counted once:
    # sum_{v<w} tr(P_v P_w) with tr(P_v P_w) = ||U_v^T U_w||_F^2. This is the
    # count under which the per-view eigenproblem L_v - lam * sum_{w!=v} P_w
    # is an exact block minimization, making the objective provably monotone.
    total = 0.0
    for v in range(len(bases)):
        for w in range(v + 1, len(bases)):
            total += float(np.sum((bases[v].T @ bases[w]) ** 2))
    return total


def _warn_if_aggressive(name, value):
    if value > _COUPLING_WARN_LEVEL:
        warnings.warn(
            f"{name}={value:g} exceeds 1e-1; the alternating scheme may not converge",
            RuntimeWarning,
            stacklevel=3,
        )


def fuse_coregularization(views, lam=None, tol=None, max_iters=None, config=DEFAULT_CONFIG):
    """Pairwise co-regularized embeddings, then k-means on their concatenation.

    Each sweep re-solves every view's eigenproblem with the other views'
    projectors as an attraction term; the objective (view trace terms minus
    lam times the pairwise projector agreement) decreases monotonically.
    Non-convergence within ``max_iters`` sweeps is flagged, not raised.
    """
    lam = config.lam if lam is None else lam
    tol = config.tol if tol is None else tol
    max_iters = config.max_iters if max_iters is None else max_iters
    if lam < 0:
        raise InvariantViolation("lambda must be nonnegative")
    _warn_if_aggressive("lambda", lam)

    laplacians = views.laplacians
    bases = [e.basis.copy() for e in views.embeddings]
    num_views = len(bases)
    m = views.num_motions

    def objective():
        return sum(_trace_terms(laplacians, bases)) - lam * _coupling_term(bases)

    trace_rows = []

    def record(sweep, view_tag):
        trace_sum = sum(_trace_terms(laplacians, bases))
        coupling = _coupling_term(bases)
        trace_rows.append(
            {
                "step": len(trace_rows),
                "sweep": sweep,
                "view": view_tag,
                "trace_term": trace_sum,
                "coupling_term": coupling,
                "total": trace_sum - lam * coupling,
            }
        )

    record(0, "init")
    converged = False
    prev_objective = objective()
    for sweep in range(1, max_iters + 1):
        for v in range(num_views):
            if lam == 0.0:
                operator = laplacians[v]
            else:
                attraction = np.zeros_like(laplacians[v])
                for w in range(num_views):
                    if w != v:
                        attraction += bases[w] @ bases[w].T
                operator = laplacians[v] - lam * attraction
                operator = (operator + operator.T) / 2.0
            bases[v] = embed(operator, m).basis
            record(sweep, MODEL_ORDER[v].value)
        current = objective()
        if abs(prev_objective - current) <= tol * max(abs(prev_objective), 1e-12):
            converged = True
            break
        prev_objective = current
    if not converged:
        warnings.warn(
            f"co-regularization did not converge in {max_iters} sweeps",
            RuntimeWarning,
            stacklevel=2,
        )

    labeling = cluster_kmeans(
        np.hstack(bases),
        m,
        restarts=config.restarts,
        seed=child_seed(config.seed, "fused-kmeans", "coreg"),
    )
    return FusionResult(labeling=labeling, embeddings=bases, trace=trace_rows, converged=converged)


def build_subset_constraints(bases):
    """Signed constraint matrices from reconstructed affinities K = U U^T.

    With views ordered (affine, homography, fundamental): the affine view
    receives only the negative part of the homography reconstruction, the
    homography view receives positive-affine plus negative-fundamental, and
    the fundamental view receives the positive homography part.
    """
    if len(bases) != 3:
        raise InvariantViolation("subset constraints are defined for exactly 3 views")
    recon = [np.clip(u @ u.T, -1.0, 1.0) for u in bases]

    def pos(mat):
        return np.where(mat > 0, mat, 0.0)

    def neg(mat):
        return np.where(mat < 0, mat, 0.0)

    return [
        neg(recon[1]),
        pos(recon[0]) + neg(recon[2]),
        pos(recon[1]),
    ]


def fuse_subset_constrained(views, gamma=None, tol=None, max_iters=None, config=DEFAULT_CONFIG):
    """Alternating eigendecomposition of constrained Laplacians L_v - gamma Q_v.

    The constraint matrices are rebuilt from the latest embeddings inside
    every sweep; convergence is measured by the largest per-view projector
    change. Non-convergence is flagged (the constraint matrices may keep
    flipping signs), never raised.
    """
    gamma = config.gamma if gamma is None else gamma
    tol = config.tol if tol is None else tol
    max_iters = config.max_iters if max_iters is None else max_iters
    if gamma < 0:
        raise InvariantViolation("gamma must be nonnegative")
    _warn_if_aggressive("gamma", gamma)

    laplacians = views.laplacians
    bases = [e.basis.copy() for e in views.embeddings]
    m = views.num_motions

    trace_rows = []

    def record(sweep, view_tag, constraints):
        trace_sum = sum(_trace_terms(laplacians, bases))
        coupling = sum(
            float(np.trace(u.T @ q @ u)) for u, q in zip(bases, constraints)
        )
        trace_rows.append(
            {
                "step": len(trace_rows),
                "sweep": sweep,
                "view": view_tag,
                "trace_term": trace_sum,
                "coupling_term": coupling,
                "total": trace_sum - gamma * coupling,
            }
        )

    record(0, "init", build_subset_constraints(bases))
    converged = False
    for sweep in range(1, max_iters + 1):
        previous = [u @ u.T for u in bases]
        for v in range(len(bases)):
            constraints = build_subset_constraints(bases)
            if gamma == 0.0:
                operator = laplacians[v]
            else:
                operator = laplacians[v] - gamma * constraints[v]
                operator = (operator + operator.T) / 2.0
            bases[v] = embed(operator, m).basis
            record(sweep, MODEL_ORDER[v].value, constraints)
        drift = max(
            float(np.linalg.norm(u @ u.T - prev, "fro"))
            for u, prev in zip(bases, previous)
        )
        if drift < tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"subset-constrained clustering did not converge in {max_iters} sweeps",
            RuntimeWarning,
            stacklevel=2,
        )

    labeling = cluster_kmeans(
        np.hstack(bases),
        m,
        restarts=config.restarts,
        seed=child_seed(config.seed, "fused-kmeans", "subset"),
    )
    return FusionResult(labeling=labeling, embeddings=bases, trace=trace_rows, converged=converged)


def per_view_corrected_labeling(embeddings, view_index, num_motions, config=DEFAULT_CONFIG):
    """K-means on a single post-fusion view embedding.

    Reproduces the per-view analysis: how much an individual view (typically
    the fundamental one) improved from being co-regularized with the others.
    """
    return cluster_kmeans(
        embeddings[view_index],
        num_motions,
        restarts=config.restarts,
        seed=child_seed(config.seed, "perview-kmeans", view_index),
    )
