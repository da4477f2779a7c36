"""Reference disentanglement metrics and the downstream probe."""

from .classifiers import fit_logistic, lasso_cd, stump_scores
from .dci import AnalyticDerivative, LassoEstimator, dci_disentanglement, dci_from_importance, dci_importance
from .downstream import downstream_accuracies, downstream_logistic
from .mig import mig
from .protocol import ProtocolParams
from .sap import sap, sap_matrix
from .votes import active_dimensions, betavae_score, factorvae_score

__all__ = [
    "AnalyticDerivative",
    "LassoEstimator",
    "ProtocolParams",
    "active_dimensions",
    "betavae_score",
    "dci_disentanglement",
    "dci_from_importance",
    "dci_importance",
    "downstream_accuracies",
    "downstream_logistic",
    "factorvae_score",
    "fit_logistic",
    "lasso_cd",
    "mig",
    "sap",
    "sap_matrix",
    "stump_scores",
]
