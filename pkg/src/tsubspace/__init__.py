"""Robust subspace clustering with multivariate-t mixtures.

28 constrained covariance/df patterns, projection-based ECM fitting,
BIC model selection over a (model x G) grid, and partition-agreement
evaluation. See README for the CLI.
"""

__version__ = "0.1.0"

from .data_io import (
    Dataset,
    SimSpec,
    load_iris,
    load_model,
    load_wine,
    read_csv,
    save_model,
    simulate_study,
    standardize,
    write_csv,
)
from .engine import (
    ComponentState,
    FitConfig,
    FitResult,
    Responsibilities,
    cm_step,
    cost_K,
    e_step,
    fit,
    initialize,
    predict,
    project,
    select_dims,
    update_nu,
    update_pi_mu,
)
from .evaluation import ConfusionTable, ari, confusion, rand_index
from .models import (
    MODEL_CODES,
    DimensionAssignment,
    ModelSpec,
    enumerate_models,
    free_param_count,
    gaussian_param_count,
    parse_model,
)
from .numerics import (
    EigenPair,
    digamma,
    log_gamma,
    mahalanobis,
    sym_eigen,
    weighted_scatter,
)
from .selection import (
    GridRequest,
    GridResult,
    aitken_check,
    bic,
    grid_search,
    total_param_count,
)
from .tdist import (
    MixtureParams,
    TParams,
    mixture_log_likelihood,
    mixture_sample,
    t_log_density,
    t_sample,
)

__all__ = [
    "__version__",
    "Dataset", "SimSpec", "load_iris", "load_model", "load_wine", "read_csv",
    "save_model", "simulate_study", "standardize", "write_csv",
    "ComponentState", "FitConfig", "FitResult", "Responsibilities", "cm_step",
    "cost_K", "e_step", "fit", "initialize", "predict", "project",
    "select_dims", "update_nu", "update_pi_mu",
    "ConfusionTable", "ari", "confusion", "rand_index",
    "MODEL_CODES", "DimensionAssignment", "ModelSpec", "enumerate_models",
    "free_param_count", "gaussian_param_count", "parse_model",
    "EigenPair", "digamma", "log_gamma", "mahalanobis", "sym_eigen",
    "weighted_scatter",
    "GridRequest", "GridResult", "aitken_check", "bic", "grid_search",
    "total_param_count",
    "MixtureParams", "TParams", "mixture_log_likelihood", "mixture_sample",
    "t_log_density", "t_sample",
]
