"""Separated Attribute Predictability with decision-stump predictors."""

from __future__ import annotations

import numpy as np

from ..core import FactorTable, validate_pair
from ..errors import DegenerateFactor, InputError
from .classifiers import stump_scores
from .protocol import ProtocolParams, protocol_split

_CHUNK = 128


def sap_matrix(reps, factors: FactorTable, params: ProtocolParams = ProtocolParams()) -> np.ndarray:
    """D x K predictability: eval balanced accuracy of a single-dimension stump.

    Multi-valued factors average one-vs-rest stumps over the values seen as
    both positive and negative in each split.
    """
    factors, reps = validate_pair(factors, reps)
    X = reps.values
    tr, ev = protocol_split(factors.n, params, "sap")
    out = np.zeros((X.shape[1], factors.k))
    for j in range(factors.k):
        ytr, yev = factors.values[tr, j], factors.values[ev, j]
        values = np.unique(ytr)
        if len(values) < 2:
            raise DegenerateFactor(f"factor {factors.names[j]!r} has {len(values)} value(s) in the train split")
        classes = [v for v in values if 0 < np.sum(yev == v) < len(yev)]
        if not classes:
            raise DegenerateFactor(f"factor {factors.names[j]!r} is constant in the eval split")
        for c in classes:
            for a in range(0, X.shape[1], _CHUNK):
                sl = slice(a, a + _CHUNK)
                out[sl, j] += stump_scores(X[tr, sl], ytr == c, X[ev, sl], yev == c)
        out[:, j] /= len(classes)
    return out


def sap(reps, factors: FactorTable, params: ProtocolParams = ProtocolParams()) -> float:
    """Mean over factors of (best - second best) single-dimension predictability."""
    scores = sap_matrix(reps, factors, params)
    if scores.shape[0] < 2:
        raise InputError("SAP needs at least two dimensions")
    top2 = np.sort(scores, axis=0)[-2:]
    return float(np.clip(np.mean(top2[1] - top2[0]), 0.0, 1.0))
