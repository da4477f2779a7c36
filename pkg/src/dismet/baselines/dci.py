"""DCI disentanglement with pluggable importance estimators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import FactorTable, validate_pair
from ..errors import InputError
from ..med import importance_from_raw
from ..mi import NATURAL
from .classifiers import lasso_cd, standardizer


@dataclass(frozen=True)
class LassoEstimator:
    """One-vs-rest lasso per factor value; importance = mean |coefficient|."""

    lam: float = 0.01
    max_iter: int = 1000
    tol: float = 1e-6

    def __post_init__(self):
        if not self.lam > 0:
            raise InputError("lasso lambda must be > 0")

    def importance(self, X: np.ndarray, factors: FactorTable) -> np.ndarray:
        mean, scale = standardizer(X)
        Z = (X - mean) / scale
        Z[:, X.std(axis=0) == 0] = 0.0
        R = np.zeros((X.shape[1], factors.k))
        for j in range(factors.k):
            values = np.unique(factors.values[:, j])
            if len(values) < 2:
                continue
            for v in values:
                y = (factors.values[:, j] == v).astype(np.float64)
                R[:, j] += np.abs(lasso_cd(Z, y - y.mean(), self.lam, self.max_iter, self.tol))
            R[:, j] /= len(values)
        return R


@dataclass(frozen=True, eq=False)
class AnalyticDerivative:
    """Importances given directly, e.g. ``|d c_i / d v_j|`` of a known encoder."""

    matrix: np.ndarray

    def importance(self, X: np.ndarray, factors: FactorTable) -> np.ndarray:
        R = np.abs(np.asarray(self.matrix, dtype=np.float64))
        if R.shape != (X.shape[1], factors.k):
            raise InputError(f"derivative matrix must be {(X.shape[1], factors.k)}, got {R.shape}")
        return R


def dci_importance(reps, factors: FactorTable, estimator=None) -> np.ndarray:
    factors, reps = validate_pair(factors, reps)
    estimator = estimator or LassoEstimator()
    return estimator.importance(reps.values, factors)


def dci_from_importance(R, base=NATURAL) -> float:
    """``sum_i rho_i (1 - H(P_i))`` over raw (not column-normalized) importances."""
    return importance_from_raw(R, base, normalize_columns=False).score


def dci_disentanglement(reps, factors: FactorTable, estimator=None, base=NATURAL) -> float:
    """DCI disentanglement; 0 when every importance is zero."""
    return dci_from_importance(dci_importance(reps, factors, estimator), base)
