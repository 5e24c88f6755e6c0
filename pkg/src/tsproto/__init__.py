"""Elastic distances, barycenter prototypes, and k-means clustering for univariate time series."""

from .averaging import (
    AveragingConfig,
    BarycenterResult,
    arithmetic_mean,
    barycenter_update,
    compute_barycenter,
    dba,
    shape_dba,
    soft_dba,
)
from .clustering import (
    ClusteringConfig,
    ClusteringResult,
    init_clusters,
    kmeans,
    kshape,
    run_clustering,
    sbd,
)
from .distances import (
    DistanceOutcome,
    ShapeDescriptorConfig,
    WarpingPath,
    dtw,
    dtw_squared,
    euclidean_distance,
    extract_subsequences,
    pairwise_distances,
    shape_dtw_efficient,
    shape_dtw_naive,
    soft_dtw,
    soft_dtw_gradient,
    softmin,
)
from .evaluation import (
    ScorePanel,
    ScoreRecord,
    adjusted_rand_index,
    average_ranks,
    holm_correction,
    mean_scores,
    rand_index,
    wilcoxon_signed_rank,
    win_tie_loss,
)
from .series import (
    LabeledDataset,
    TimeSeries,
    load_ucr_tsv,
    merge_train_test,
    save_ucr_tsv,
    z_normalize,
)

__version__ = "0.1.0"

__all__ = [
    "AveragingConfig",
    "BarycenterResult",
    "ClusteringConfig",
    "ClusteringResult",
    "DistanceOutcome",
    "LabeledDataset",
    "ScorePanel",
    "ScoreRecord",
    "ShapeDescriptorConfig",
    "TimeSeries",
    "WarpingPath",
    "adjusted_rand_index",
    "arithmetic_mean",
    "average_ranks",
    "barycenter_update",
    "compute_barycenter",
    "dba",
    "dtw",
    "dtw_squared",
    "euclidean_distance",
    "extract_subsequences",
    "holm_correction",
    "init_clusters",
    "kmeans",
    "kshape",
    "load_ucr_tsv",
    "mean_scores",
    "merge_train_test",
    "pairwise_distances",
    "rand_index",
    "run_clustering",
    "save_ucr_tsv",
    "sbd",
    "shape_dba",
    "shape_dtw_efficient",
    "shape_dtw_naive",
    "soft_dba",
    "soft_dtw",
    "soft_dtw_gradient",
    "softmin",
    "wilcoxon_signed_rank",
    "win_tie_loss",
    "z_normalize",
]
