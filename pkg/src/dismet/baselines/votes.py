"""BetaVAE and FactorVAE scores: classifiers over fixed-factor batches."""

from __future__ import annotations

import numpy as np

from ..core import FactorTable, validate_pair
from ..errors import AllDimensionsPruned
from .classifiers import fit_logistic
from .protocol import ProtocolParams, fixed_factor_draws, value_groups

_CELLS_PER_CHUNK = 4_000_000


def _chunk(batch_size: int, d: int) -> int:
    return max(1, min(1024, _CELLS_PER_CHUNK // (batch_size * d)))


def betavae_features(reps, factors: FactorTable, params: ProtocolParams, start: int, count: int):
    """Features ``mean_batch |z1 - z2|`` and fixed-factor labels for draws ``start..start+count-1``."""
    factors, reps = validate_pair(factors, reps)
    X = reps.values
    groups = value_groups(factors, min_size=2)
    feats = np.empty((count, X.shape[1]))
    labels = np.empty(count, dtype=np.int64)
    step = _chunk(params.batch_size, X.shape[1])
    for a in range(0, count, step):
        m = min(step, count - a)
        k, rows = fixed_factor_draws(factors, params.seed, "betavae", start + a, m,
                                     params.batch_size, 2, groups)
        feats[a:a + m] = np.abs(X[rows[0]] - X[rows[1]]).mean(axis=1)
        labels[a:a + m] = k
    return feats, labels


def betavae_score(reps, factors: FactorTable, params: ProtocolParams = ProtocolParams()) -> float:
    """Eval accuracy of a logistic classifier predicting which factor was held fixed.

    Draws ``0..num_train-1`` train the classifier, the next ``num_eval`` evaluate it.

    Raises:
        InsufficientSamples: some observed factor value has fewer than 2 rows.
    """
    Xtr, ytr = betavae_features(reps, factors, params, 0, params.num_train)
    Xev, yev = betavae_features(reps, factors, params, params.num_train, params.num_eval)
    model = fit_logistic(Xtr, ytr, n_classes=factors.k)
    return model.accuracy(Xev, yev)


def active_dimensions(global_var: np.ndarray, threshold: float) -> np.ndarray:
    """Dimensions kept for voting: global variance at or above the prune threshold."""
    return np.asarray(global_var) >= threshold


def factorvae_votes(reps, factors: FactorTable, params: ProtocolParams, start: int, count: int):
    """(argmin dimension, fixed factor) per draw.

    Each batch's per-dimension variance is divided by the global variance
    (i.e. the representation is scaled by its global std) and the smallest
    ratio among active dimensions wins the vote.
    """
    factors, reps = validate_pair(factors, reps)
    X = reps.values
    global_var = X.var(axis=0)
    active = np.flatnonzero(active_dimensions(global_var, params.prune_threshold))
    if active.size == 0:
        raise AllDimensionsPruned(f"no dimension has variance >= {params.prune_threshold}")
    Xa = X[:, active] / np.sqrt(global_var[active])
    groups = value_groups(factors, min_size=1)
    dims = np.empty(count, dtype=np.int64)
    labels = np.empty(count, dtype=np.int64)
    step = _chunk(params.batch_size, active.size)
    for a in range(0, count, step):
        m = min(step, count - a)
        k, rows = fixed_factor_draws(factors, params.seed, "factorvae", start + a, m,
                                     params.batch_size, 1, groups)
        local = Xa[rows[0]].var(axis=1)
        dims[a:a + m] = active[np.argmin(local, axis=1)]
        labels[a:a + m] = k
    return dims, labels


def factorvae_score(reps, factors: FactorTable, params: ProtocolParams = ProtocolParams()) -> float:
    """Eval accuracy of the majority-vote classifier mapping argmin dimension to factor.

    Raises:
        AllDimensionsPruned: every dimension's variance is below the threshold.
    """
    reps_d = np.asarray(getattr(reps, "values", reps)).shape[1]
    dtr, ytr = factorvae_votes(reps, factors, params, 0, params.num_train)
    dev, yev = factorvae_votes(reps, factors, params, params.num_train, params.num_eval)
    table = np.zeros((reps_d, factors.k), dtype=np.int64)
    np.add.at(table, (dtr, ytr), 1)
    classifier = np.argmax(table, axis=1)
    return float(np.mean(classifier[dev] == yev))
