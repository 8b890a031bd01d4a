"""k-support norm regularised linear prediction."""

__version__ = "0.1.0"

from ._common import DivergenceError, InconsistencyError
from .norms import (
    elastic_dual_norm,
    elastic_norm,
    ksup_dual_norm,
    ksup_norm,
    sort_abs_desc,
)
from .prox import prox_elastic, prox_ksup_sq, prox_l1
from .solver import ElasticNet, FitConfig, FitResult, KSupport, Lasso, fista, fit

__all__ = [
    "DivergenceError",
    "InconsistencyError",
    "elastic_dual_norm",
    "elastic_norm",
    "ksup_dual_norm",
    "ksup_norm",
    "sort_abs_desc",
    "prox_elastic",
    "prox_ksup_sq",
    "prox_l1",
    "ElasticNet",
    "FitConfig",
    "FitResult",
    "KSupport",
    "Lasso",
    "fista",
    "fit",
]
