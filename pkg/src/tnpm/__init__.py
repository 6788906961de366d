"""Two-way node popularity model: fitting, generation, and evaluation.

A bipartite Poisson block model in which every row node has a
popularity parameter per column community and vice versa.  The package
fits it by variational EM with spectral initialization and multiple
restarts, generates planted benchmark networks (bipartite and
undirected), and evaluates clusterings with ARI, misclustering rates,
objective scoring, and a chi-square independence test.
"""

from .model import (
    MIXING_FLOOR,
    PARAM_FLOOR,
    BipartiteAdjacency,
    HardLabels,
    ModelParams,
    SoftAssignment,
    joint_log_likelihood,
    kl_poisson,
    poisson_log_pmf,
)
from .vem import (
    FitConfig,
    FitResult,
    InnerMStepResult,
    e_step_cols,
    e_step_rows,
    elbo,
    fit,
    fit_undirected,
    hard_labels,
    m_step_mixing,
    m_step_popularity_closed,
    m_step_popularity_iterative,
)
from .spectral import SvdFactors, kmeans, random_init, svd_init, truncated_svd
from .generate import (
    PlantedBipartite,
    PlantedUndirected,
    gen_bipartite_tnpm,
    gen_undirected_pabm,
)
from .metrics import (
    ConfusionMatrix,
    ari,
    chi_square_independence,
    misclustering_rate,
    score_labels,
    soft_confusion,
)
from .sweep import SweepRecord, SweepReport, SweepSummary, run_sweep
from .io import DataError

__version__ = "0.1.0"

__all__ = [
    "MIXING_FLOOR",
    "PARAM_FLOOR",
    "BipartiteAdjacency",
    "HardLabels",
    "ModelParams",
    "SoftAssignment",
    "joint_log_likelihood",
    "kl_poisson",
    "poisson_log_pmf",
    "FitConfig",
    "FitResult",
    "InnerMStepResult",
    "e_step_cols",
    "e_step_rows",
    "elbo",
    "fit",
    "fit_undirected",
    "hard_labels",
    "m_step_mixing",
    "m_step_popularity_closed",
    "m_step_popularity_iterative",
    "SvdFactors",
    "kmeans",
    "random_init",
    "svd_init",
    "truncated_svd",
    "PlantedBipartite",
    "PlantedUndirected",
    "gen_bipartite_tnpm",
    "gen_undirected_pabm",
    "ConfusionMatrix",
    "ari",
    "chi_square_independence",
    "misclustering_rate",
    "score_labels",
    "soft_confusion",
    "SweepRecord",
    "SweepReport",
    "SweepSummary",
    "run_sweep",
    "DataError",
    "__version__",
]
