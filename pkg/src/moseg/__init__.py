"""Motion segmentation of tracked feature trajectories.

Hypothesizes affine, homography, and fundamental-matrix models between frame
pairs, encodes point affinities with the ordered residual kernel, and fuses
the per-model affinity matrices via multi-view spectral clustering (kernel
addition, co-regularization, subset-constrained clustering).
"""

from .config import SegmentationConfig
from .errors import MosegError
from .fusion import (
    FusionResult,
    ViewSet,
    build_subset_constraints,
    build_views,
    fuse_coregularization,
    fuse_kernel_addition,
    fuse_subset_constrained,
    per_view_corrected_labeling,
)
from .geometry import (
    MODEL_ORDER,
    ModelHypothesis,
    ModelKind,
    fit_affine,
    fit_fundamental,
    fit_homography,
    hartley_normalize,
    sampson_residual,
)
from .hypotheses import ResidualMatrix, sample_hypotheses
from .kernels import backend_name
from .ork import AffinityMatrix, build_ork, normalize_covisibility, sparsify_epsilon
from .spectral import (
    Labeling,
    SpectralEmbedding,
    cluster_kmeans,
    embed,
    normalized_laplacian,
    segment_single_view,
)
from .synthlab import (
    SceneSpec,
    classification_error,
    generate_scene,
    make_benchmark_suite,
)
from .trajectory_io import TrajectorySet, load_trajectories, prune_short_tracks, save_trajectories

__version__ = "0.1.0"

__all__ = [
    "AffinityMatrix",
    "FusionResult",
    "Labeling",
    "MODEL_ORDER",
    "ModelHypothesis",
    "ModelKind",
    "MosegError",
    "ResidualMatrix",
    "SceneSpec",
    "SegmentationConfig",
    "SpectralEmbedding",
    "TrajectorySet",
    "ViewSet",
    "backend_name",
    "build_ork",
    "build_subset_constraints",
    "build_views",
    "classification_error",
    "cluster_kmeans",
    "embed",
    "fit_affine",
    "fit_fundamental",
    "fit_homography",
    "fuse_coregularization",
    "fuse_kernel_addition",
    "fuse_subset_constrained",
    "generate_scene",
    "hartley_normalize",
    "load_trajectories",
    "make_benchmark_suite",
    "normalize_covisibility",
    "normalized_laplacian",
    "per_view_corrected_labeling",
    "prune_short_tracks",
    "sample_hypotheses",
    "sampson_residual",
    "save_trajectories",
    "segment_single_view",
    "sparsify_epsilon",
]
