"""Downstream probe: per-factor logistic regression on the representation."""

from __future__ import annotations

import numpy as np

from ..core import FactorTable, validate_pair
from ..errors import DegenerateFactor
from .classifiers import fit_logistic
from .protocol import ProtocolParams, split_indices

TRAIN_FRACTION = 0.8


def downstream_accuracies(reps, factors: FactorTable, params: ProtocolParams = ProtocolParams()) -> np.ndarray:
    """Eval accuracy per factor on a seeded 80/20 split (same split for all factors)."""
    factors, reps = validate_pair(factors, reps)
    tr, ev = split_indices(factors.n, params.seed, "downstream", TRAIN_FRACTION)
    X = reps.values
    acc = np.empty(factors.k)
    for j in range(factors.k):
        y = factors.values[:, j]
        if len(np.unique(y[tr])) < 2:
            raise DegenerateFactor(f"factor {factors.names[j]!r} has one value in the train split")
        model = fit_logistic(X[tr], y[tr], n_classes=factors.cardinalities[j])
        acc[j] = model.accuracy(X[ev], y[ev])
    return acc


def downstream_logistic(reps, factors: FactorTable, params: ProtocolParams = ProtocolParams()) -> float:
    """Mean eval accuracy across factors."""
    return float(np.mean(downstream_accuracies(reps, factors, params)))
