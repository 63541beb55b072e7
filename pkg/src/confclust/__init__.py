"""Confident-set clustering of high-dimensional points.

The pipeline scores every pair of points by how much a low-rank PCA
projection shrinks their distance, links the most compressed pairs, peels
off dense high-purity vertex sets spectrally, merges them into primary
clusters and finally assigns the remaining points by majority vote over
their closest partners.
"""

from .assign import finalize, majority_assign
from .clustering import Clustering
from .config import RunConfig, load_config
from .confident import (
    ConfidentSet,
    ExtractionResult,
    default_stop_threshold,
    extract_confident_sets,
    filter_low_degree,
    select_dense_prefix,
    top_eigenvector,
)
from .corrgraph import CorrelationGraph, build_correlation_graph, compression_curve, graph_quality
from .errors import (
    ConfclustError,
    ConvergenceError,
    ConvergenceWarning,
    DimensionMismatch,
    DuplicateId,
    EmptyCluster,
    EmptyInput,
    EmptySet,
    FormatError,
    InvalidInput,
    InvalidParameter,
    MissingLabel,
    NoEdges,
    ParseError,
    Undefined,
)
from .evaluate import (
    ConfusionTable,
    adjusted_rand_index,
    cluster_error,
    cluster_identity,
    confusion_table,
    error_summary,
    partition_agreement,
    zeta,
)
from .ingest import DataMatrix, GroundTruth, load_dense_matrix, load_labels, load_sparse_matrix, normalize
from .kernels import BACKEND
from .merge import Neighborhoods, StoppingRule, delta_neighborhoods, form_primary_clusters, pair_affinity
from .pca import PairScores, all_pair_scores, compression_ratio, fit_pca, project
from .pipeline import RunReport, SweepReport, run_pipeline, sweep
from .synth import NoiseSpec, SbmSpec, VectorModelSpec, gen_planted_dense, gen_sbm, gen_vectors

__version__ = "0.1.0"
