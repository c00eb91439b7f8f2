"""Random hypothesis generation and the point x hypothesis residual matrix."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateSampleError, HypothesisExhaustionError, NumericalFailureError
from .geometry import ModelKind, fit_model
from .seeding import generator

# Frame pairs: half the draws take consecutive frames (small, reliably tracked
# motion), half take an arbitrary pair (wide baseline for conditioning).
_CONSECUTIVE_PROB = 0.5
_MAX_ATTEMPT_FACTOR = 100


@dataclass
class ResidualMatrix:
    """Sampson residuals of N points against K hypotheses of one family.

    ``values[i, k]`` is NaN where ``missing[i, k]`` is true, i.e. point i is
    not co-visible in hypothesis k's frame pair. Non-missing entries are
    nonnegative (a point sitting exactly on an epipole can yield +inf; ORK
    only consumes the ordering, so such entries simply rank last).
    """

    kind: ModelKind
    values: np.ndarray
    missing: np.ndarray
    hypotheses: list

    @property
    def num_points(self):
        return self.values.shape[0]

    @property
    def num_hypotheses(self):
        return self.values.shape[1]


def sample_hypotheses(traj, kind, budget, seed):
    """Draw ``budget`` accepted minimal-sample hypotheses and fill residuals.

    Degenerate samples are rejected and redrawn (they do not count against the
    budget); after 100 x budget attempts a HypothesisExhaustionError signals a
    pathologically degenerate sequence. Deterministic given ``seed``.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    num_frames = traj.num_frames
    if num_frames < 2:
        raise HypothesisExhaustionError("need at least 2 frames to hypothesize models")
    p = kind.min_sample_size
    rng = generator(seed, "hypotheses", kind.value)
    visibility = traj.visibility
    positions = traj.positions

    hypotheses = []
    matrices = np.empty((budget, 3, 3))
    pairs = np.empty((budget, 2), dtype=np.int64)
    attempts = 0
    max_attempts = _MAX_ATTEMPT_FACTOR * budget
    while len(hypotheses) < budget:
        if attempts >= max_attempts:
            raise HypothesisExhaustionError(
                f"{attempts} attempts produced only {len(hypotheses)} of "
                f"{budget} valid {kind.value} hypotheses"
            )
        attempts += 1
        if rng.random() < _CONSECUTIVE_PROB:
            f1 = int(rng.integers(0, num_frames - 1))
            f2 = f1 + 1
        else:
            f1, f2 = sorted(int(v) for v in rng.choice(num_frames, size=2, replace=False))
        covisible = np.where(visibility[:, f1] & visibility[:, f2])[0]
        if covisible.size < p:
            continue
        sample = rng.choice(covisible, size=p, replace=False)
        src = positions[sample, f1]
        dst = positions[sample, f2]
        try:
            hyp = fit_model(
                kind, src, dst, frame_pair=(f1, f2), sample_ids=tuple(int(s) for s in sample)
            )
        except (DegenerateSampleError, NumericalFailureError):
            continue
        k = len(hypotheses)
        matrices[k] = hyp.matrix
        pairs[k] = (f1, f2)
        hypotheses.append(hyp)

    values, missing = kernels.fill_residual_matrix(
        kind.residual_code, matrices, pairs, positions, visibility
    )
    return ResidualMatrix(kind=kind, values=values, missing=missing, hypotheses=hypotheses)
