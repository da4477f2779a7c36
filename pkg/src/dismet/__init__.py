"""Entropy-based disentanglement metrics, reference baselines and synthetic scenarios."""

from .core import FactorTable, MetricReport, RepresentationMatrix, indices_with_factor_fixed, validate_pair
from .errors import DismetError, InputError, MetricError
from .med import (
    ImportanceMatrix,
    TopKSelection,
    cooccurrence,
    dimension_scores,
    importance_matrix,
    manipulation_variance,
    med_score,
    pca_reduce,
    topk_med,
    topk_select,
)
from .mi import MIMatrix, discrete_entropy, discretize, mi_matrix, mutual_information

__all__ = [
    "DismetError",
    "FactorTable",
    "ImportanceMatrix",
    "InputError",
    "MIMatrix",
    "MetricError",
    "MetricReport",
    "RepresentationMatrix",
    "TopKSelection",
    "cooccurrence",
    "dimension_scores",
    "discrete_entropy",
    "discretize",
    "importance_matrix",
    "indices_with_factor_fixed",
    "manipulation_variance",
    "med_score",
    "mi_matrix",
    "mutual_information",
    "pca_reduce",
    "topk_med",
    "topk_select",
    "validate_pair",
]
__version__ = "0.1.0"
