"""warpbench: elastic time-series analysis and benchmark statistics.

Subpackages cover dataset handling, elastic distances with warping paths,
barycenter prototyping and dataset extension, k-means clustering,
hand-crafted convolution filters, generative-evaluation metrics, and
multi-dataset benchmark statistics.  All randomness is seed-controlled.
"""

from .averaging import (
    NeighborWeights,
    Prototype,
    arithmetic_mean,
    dba,
    extend_dataset,
    neighbor_weights,
    shape_dba,
    weighted_shape_dba,
)
from .benchstats import (
    BayesianPosterior,
    Mcm,
    McmCell,
    RankTable,
    ResultsTable,
    bayesian_signed_rank,
    build_mcm,
    friedman,
    holm_correct,
    nemenyi_cd,
    ranks,
    wilcoxon_signed_rank,
)
from .clustering import ClusteringResult, adjusted_rand_index, kmeans_eba
from .data import (
    Dataset,
    MinMaxScaler,
    TimeSeries,
    load_multivariate_dataset,
    load_ucr_dataset,
    minmax_fit_transform,
    resample_linear,
    save_dataset,
    znormalize,
)
from .distances import (
    DistanceConfig,
    WarpingPath,
    dtw,
    dtw_cost,
    dtw_rooted,
    euclidean,
    msm,
    shape_dtw,
    soft_dtw,
    soft_min,
)
from .filters import Kernel, convolve1d, handcrafted_bank, make_filter
from .genmetrics import (
    GaussianSummary,
    LatentSet,
    acpd,
    aog,
    apd,
    evaluate_generation,
    fid,
    knn_diversity,
    knn_fidelity,
    mms,
    reference_split,
    wpd,
)

__version__ = "0.1.0"
