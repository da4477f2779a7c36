"""Small deterministic learners used by the reference metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EstimatorFailure, InputError

LR_RATE = 0.1
LR_EPOCHS = 500
LR_L2 = 1e-4


def standardizer(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column mean and std; zero-variance columns get scale 1."""
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    return mean, np.where(std > 0, std, 1.0)


@dataclass(frozen=True, eq=False)
class LogisticModel:
    mean: np.ndarray
    scale: np.ndarray
    W: np.ndarray
    b: np.ndarray

    def decision(self, X) -> np.ndarray:
        Z = (np.asarray(X, dtype=np.float64) - self.mean) / self.scale
        return Z @ self.W + self.b

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision(X), axis=1)

    def accuracy(self, X, y) -> float:
        return float(np.mean(self.predict(X) == np.asarray(y)))


def fit_logistic(X, y, n_classes: int | None = None, lr: float = LR_RATE,
                 epochs: int = LR_EPOCHS, l2: float = LR_L2) -> LogisticModel:
    """Multinomial logistic regression by full-batch gradient descent.

    Inputs are standardized with the training statistics, weights start at
    zero, and the loss is mean cross-entropy plus ``l2 / 2 * ||W||^2``.  A
    fixed number of epochs keeps the result reproducible.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y) or len(y) == 0:
        raise InputError("logistic regression needs a non-empty 2-d X aligned with y")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    mean, scale = standardizer(X)
    Z = (X - mean) / scale
    n, d = Z.shape
    Y = np.zeros((n, n_classes))
    Y[np.arange(n), y] = 1.0
    W = np.zeros((d, n_classes))
    b = np.zeros(n_classes)
    for _ in range(epochs):
        logits = Z @ W + b
        logits -= logits.max(axis=1, keepdims=True)
        P = np.exp(logits)
        P /= P.sum(axis=1, keepdims=True)
        G = (P - Y) / n
        W -= lr * (Z.T @ G + l2 * W)
        b -= lr * G.sum(axis=0)
    return LogisticModel(mean, scale, W, b)


def lasso_cd(X, y, lam: float, max_iter: int = 1000, tol: float = 1e-6) -> np.ndarray:
    """Lasso by cyclic coordinate descent on the Gram matrix.

    Minimizes ``1/(2n) ||y - Xw||^2 + lam * ||w||_1`` (no intercept; center
    the data first).  One iteration is a full sweep over coordinates.

    Raises:
        EstimatorFailure: the largest coordinate change is still above ``tol``
            after ``max_iter`` sweeps.
    """
    if not lam > 0:
        raise InputError("lasso penalty must be positive")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    G = X.T @ X / n
    c = X.T @ y / n
    diag = np.diag(G).copy()
    w = np.zeros(d)
    Gw = np.zeros(d)
    for _ in range(max_iter):
        max_delta = 0.0
        for i in range(d):
            if diag[i] <= 0:
                continue
            r = c[i] - Gw[i] + diag[i] * w[i]
            new = np.sign(r) * max(abs(r) - lam, 0.0) / diag[i]
            delta = new - w[i]
            if delta != 0.0:
                Gw += G[:, i] * delta
                w[i] = new
                max_delta = max(max_delta, abs(delta))
        if max_delta <= tol:
            return w
    raise EstimatorFailure(f"lasso did not converge in {max_iter} sweeps (last change {max_delta:.3g})")


@dataclass(frozen=True)
class Stump:
    threshold: float
    positive_above: bool

    def predict(self, x) -> np.ndarray:
        above = np.asarray(x) > self.threshold
        return above if self.positive_above else ~above


def balanced_accuracy(pred: np.ndarray, target: np.ndarray) -> float:
    pos = target.sum()
    neg = target.size - pos
    if pos == 0 or neg == 0:
        raise InputError("balanced accuracy needs both classes")
    tpr = np.sum(pred & target) / pos
    tnr = np.sum(~pred & ~target) / neg
    return 0.5 * (tpr + tnr)


def fit_stumps(X: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Best single-threshold rule per column of ``X`` for a boolean target.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values, plus the trivial rule (score 0.5).  Ties keep the lowest
    threshold, then the "positive above" polarity.

    Returns:
        thresholds (D,), positive_above (D,) boolean.
    """
    X = np.asarray(X, dtype=np.float64)
    t = np.asarray(target, dtype=bool)
    n, d = X.shape
    pos = t.sum()
    neg = n - pos
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    cp = np.cumsum(t[order], axis=0)  # positives among the first m+1 sorted rows
    m = np.arange(1, n + 1)[:, None]
    # rule "positive above": left part (first m+1) predicted negative
    tpr = (pos - cp) / pos
    tnr = (m - cp) / neg
    ba = 0.5 * (tpr + tnr)
    valid = np.zeros_like(ba, dtype=bool)
    valid[:-1] = xs[1:] > xs[:-1]
    score = np.where(valid, np.maximum(ba, 1.0 - ba), -np.inf)
    best = np.argmax(score, axis=0)
    best_score = score[best, np.arange(d)]
    thresholds = np.full(d, np.inf)
    above = np.ones(d, dtype=bool)
    ok = best_score > 0.5
    cols = np.flatnonzero(ok)
    rows = best[ok]
    thresholds[cols] = 0.5 * (xs[rows, cols] + xs[rows + 1, cols])
    above[cols] = ba[rows, cols] >= 1.0 - ba[rows, cols]
    return thresholds, above


def stump_scores(X_train, t_train, X_eval, t_eval) -> np.ndarray:
    """Eval-split balanced accuracy of each column's train-fitted stump.

    Scores are floored at 0.5, the score of the trivial rule, so no column
    looks less predictive than a constant one.
    """
    thr, above = fit_stumps(X_train, t_train)
    X_eval = np.asarray(X_eval, dtype=np.float64)
    t_eval = np.asarray(t_eval, dtype=bool)
    pred = X_eval > thr[None, :]
    pred = np.where(above[None, :], pred, ~pred)
    trivial = ~np.isfinite(thr)
    pred[:, trivial] = False
    pos = t_eval.sum()
    neg = t_eval.size - pos
    tpr = (pred & t_eval[:, None]).sum(axis=0) / pos
    tnr = (~pred & ~t_eval[:, None]).sum(axis=0) / neg
    return np.maximum(0.5 * (tpr + tnr), 0.5)
