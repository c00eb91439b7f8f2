"""Pipeline configuration shared by the library API and the CLI."""

from dataclasses import dataclass, replace


@dataclass
class SegmentationConfig:
    """Knobs for the hypothesize / kernel / cluster pipeline.

    ``budget=None`` means the paper's default of 500 hypotheses per frame.
    ``lam`` and ``gamma`` are the co-regularization and subset-constraint
    weights (both default to 1e-2).
    """

    budget: int | None = None
    h_fraction: float = 0.1
    epsilon_quantile: float = 0.75
    lam: float = 1e-2
    gamma: float = 1e-2
    restarts: int = 20
    seed: int = 0
    tol: float = 1e-6
    max_iters: int = 50
    kernel_rescale: bool = True

    def resolve_budget(self, num_frames):
        return self.budget if self.budget is not None else 500 * num_frames

    def with_seed(self, seed):
        return replace(self, seed=seed)


DEFAULT_CONFIG = SegmentationConfig()
