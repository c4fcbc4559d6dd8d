"""Evolutionary subspace clustering.

Clusters collections of points lying on a union of temporally evolving
low-dimensional subspaces. The representation at each time step is a
convex combination of a freshly learned sparse innovation and the carried
previous representation, with the combination weight found by a scalar
search; clusters come from spectral clustering of the induced affinity and
are tracked across time by maximum-overlap matching.
"""

__version__ = "0.1.0"

from .baselines import AffectState, affect_step, align_affinity, static_step
from .cesm import (CesmState, DegenerateProblemError, adjust_state,
                   cesm_initial_step, cesm_step, golden_section_alpha)
from .core import (AffinityMatrix, EvolvingSequence, Labeling,
                   RankDeficientWarning, RepresentationMatrix, Snapshot,
                   ZeroColumnError, build_affinity, normalize_columns,
                   pca_project, residual)
from .learners import (AlphaTooSmallError, GreedyState, LearnerConfig,
                       NotConvergedWarning, aols_column, compute_xtilde,
                       learn_aols, learn_bp_admm, learn_omp,
                       learn_representation, omp_column, soft_threshold)
from .metrics import RunRecord, clustering_error, rand_index
from .seqio import (DimensionMismatchError, MalformedMatrixError,
                    ManifestMissingError, dump_sequence, load_sequence)
from .spectral import (IsolatedVertexWarning, SpectralConfig, kmeans,
                       spectral_cluster)
from .synthgen import (MergeEvent, ScenarioConfig, generate_sequence,
                       random_subspaces, rotate_basis, sample_points)
from .tracking import MatchResult, hungarian_match, relabel
from .experiment import ExperimentConfig, run_experiment

__all__ = [
    "AffectState", "affect_step", "align_affinity", "static_step",
    "CesmState", "DegenerateProblemError", "adjust_state",
    "cesm_initial_step", "cesm_step", "golden_section_alpha",
    "AffinityMatrix", "EvolvingSequence", "Labeling", "RankDeficientWarning",
    "RepresentationMatrix", "Snapshot", "ZeroColumnError", "build_affinity",
    "normalize_columns", "pca_project", "residual",
    "AlphaTooSmallError", "GreedyState", "LearnerConfig",
    "NotConvergedWarning", "aols_column", "compute_xtilde", "learn_aols",
    "learn_bp_admm", "learn_omp", "learn_representation", "omp_column",
    "soft_threshold",
    "RunRecord", "clustering_error", "rand_index",
    "DimensionMismatchError", "MalformedMatrixError", "ManifestMissingError",
    "dump_sequence", "load_sequence",
    "IsolatedVertexWarning", "SpectralConfig", "kmeans", "spectral_cluster",
    "MergeEvent", "ScenarioConfig", "generate_sequence", "random_subspaces",
    "rotate_basis", "sample_points",
    "MatchResult", "hungarian_match", "relabel",
    "ExperimentConfig", "run_experiment",
]
