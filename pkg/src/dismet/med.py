"""MED, Top-k MED, factor co-occurrence and manipulation probes.

Sums across latent dimensions use ``math.fsum`` so the score does not move
when dimensions are permuted or when zero-information dimensions are added.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import FactorTable, RepresentationMatrix, as_reps, validate_pair
from .errors import EmptySelection, InputError, NotAGrid, RankDeficientWarning
from .mi import BASES, DEFAULT_BINS, NATURAL, MIMatrix, log_unit, mi_matrix


@dataclass(frozen=True, eq=False)
class ImportanceMatrix:
    """Column-normalized importances and the quantities derived from them.

    Attributes:
        R: D x K, each column sums to 1 or is all zero.
        P: D x K, each row of R normalized to a distribution (zero rows stay 0).
        S: per-dimension score ``1 - H(P_i)``; 0 for zero rows.
        rho: per-dimension weight ``sum_j R_ij / sum_ij R_ij``.
        base: entropy base used for ``S``.
    """

    R: np.ndarray
    P: np.ndarray
    S: np.ndarray
    rho: np.ndarray
    base: str = NATURAL

    @property
    def d(self) -> int:
        return self.R.shape[0]

    @property
    def k(self) -> int:
        return self.R.shape[1]

    @property
    def score(self) -> float:
        """MED: rho-weighted mean of the per-dimension scores."""
        return math.fsum(self.rho * self.S)


def _column_normalize(values: np.ndarray) -> np.ndarray:
    sums = np.array([math.fsum(values[:, j]) for j in range(values.shape[1])])
    R = np.zeros_like(values, dtype=np.float64)
    pos = sums > 0
    R[:, pos] = values[:, pos] / sums[pos]
    return R


def _row_entropy(P: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(np.where(P > 0, P, 1.0)), 0.0)
    return -terms.sum(axis=1)


def dimension_scores(R: np.ndarray, base=NATURAL) -> np.ndarray:
    """``S_i = 1 - H(P_i)`` with ``P_i`` the normalized row ``i`` of ``R``."""
    R = np.asarray(R, dtype=np.float64)
    P = _row_distribution(R)
    return _scores_from_P(P, base)


def _row_distribution(R):
    rows = R.sum(axis=1)
    P = np.zeros_like(R)
    pos = rows > 0
    P[pos] = R[pos] / rows[pos, None]
    return P


def _scores_from_P(P, base):
    k = P.shape[1]
    S = 1.0 - _row_entropy(P) / log_unit(base, k)
    S[~(P.sum(axis=1) > 0)] = 0.0
    return S


def importance_from_raw(values, base=NATURAL, normalize_columns: bool = True) -> ImportanceMatrix:
    """Importance matrix from any nonnegative D x K relevance matrix.

    With ``normalize_columns`` the columns are rescaled to sum to 1 first (the
    MI route); DCI-style estimators pass raw importances and skip it.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise InputError("importance input must be 2-d")
    if np.any(values < 0):
        raise InputError("importances must be nonnegative")
    if base not in BASES:
        raise InputError(f"unknown entropy base {base!r}")
    R = _column_normalize(values) if normalize_columns else values.copy()
    P = _row_distribution(R)
    S = _scores_from_P(P, base)
    mass = R.sum(axis=1)
    total = math.fsum(mass)
    rho = mass / total if total > 0 else np.zeros_like(mass)
    return ImportanceMatrix(R, P, S, rho, base)


def importance_matrix(mi: MIMatrix) -> ImportanceMatrix:
    """``R_ij = I(c_i, v_j) / sum_d I(c_d, v_j)``; zero-information factors stay all-zero."""
    return importance_from_raw(mi.values, mi.base)


def med_from_importance(imp: ImportanceMatrix) -> float:
    return imp.score


def med_score(reps, factors: FactorTable, bins: int = DEFAULT_BINS, base=NATURAL,
              workers: int | None = None) -> float:
    """MED of a representation.

    Returns the raw value.  With the natural base and K >= 3 individual scores
    can be negative; callers clamp to [0, 1] only for display.
    """
    return importance_matrix(mi_matrix(reps, factors, bins, base, workers)).score


@dataclass(frozen=True)
class TopKSelection:
    k: int
    groups: tuple[tuple[int, ...], ...]
    picked_per_factor: tuple[tuple[int, ...], ...]
    picked: tuple[int, ...]


def topk_select(R: np.ndarray, S: np.ndarray, k: int) -> TopKSelection:
    """Per factor, the ``k`` highest-scoring dimensions whose argmax importance is that factor.

    Dimensions with an all-zero row belong to no group.  Argmax ties go to the
    lower factor index, score ties to the lower dimension index.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    R = np.asarray(R, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    informative = R.sum(axis=1) > 0
    owner = np.argmax(R, axis=1)
    groups, picks = [], []
    for j in range(R.shape[1]):
        g = np.flatnonzero(informative & (owner == j))
        # lexsort: last key is primary -> descending S, then ascending index
        order = np.lexsort((g, -S[g]))
        groups.append(tuple(int(i) for i in g))
        picks.append(tuple(sorted(int(i) for i in g[order[:k]])))
    picked = tuple(sorted(set().union(*picks))) if picks else ()
    return TopKSelection(k, tuple(groups), tuple(picks), picked)


def topk_med(reps, factors: FactorTable, k: int, bins: int = DEFAULT_BINS, base=NATURAL,
             workers: int | None = None, return_selection: bool = False):
    """MED recomputed on the sub-vector picked by :func:`topk_select`.

    The importance matrix of the sub-vector is rebuilt from scratch, since the
    column normalization depends on which dimensions are present.
    """
    factors, reps = validate_pair(factors, reps)
    imp = importance_matrix(mi_matrix(reps, factors, bins, base, workers))
    sel = topk_select(imp.R, imp.S, k)
    if not sel.picked:
        raise EmptySelection("no informative dimension to select")
    sub = reps.columns(sel.picked)
    score = importance_matrix(mi_matrix(sub, factors, bins, base, workers)).score
    return (score, sel) if return_selection else score


def cooccurrence(mi_selected) -> np.ndarray:
    """K x K cosine similarity between factors' MI profiles over selected dimensions.

    A factor whose profile has zero norm gets an all-zero row and column.
    """
    I = np.asarray(getattr(mi_selected, "values", mi_selected), dtype=np.float64)
    norms = np.sqrt(np.einsum("dk,dk->k", I, I))
    gram = I.T @ I
    C = np.zeros_like(gram)
    ok = norms > 0
    C[np.ix_(ok, ok)] = gram[np.ix_(ok, ok)] / np.outer(norms[ok], norms[ok])
    # profiles are nonnegative, so cosines lie in [0, 1]; self-similarity is exactly 1
    np.clip(C, 0.0, 1.0, out=C)
    C[ok, ok] = 1.0
    return C


def grid_groups(factors: FactorTable, j: int) -> dict[tuple, np.ndarray]:
    """Rows grouped by the assignment of every factor except ``j``.

    Raises:
        NotAGrid: some combination of factor values never occurs.
    """
    vals = factors.values
    cards = factors.cardinalities
    present = {tuple(r) for r in np.unique(vals, axis=0)}
    expected = math.prod(cards)
    if len(present) != expected:
        raise NotAGrid(f"{len(present)} of {expected} factor combinations present")
    others = [m for m in range(factors.k) if m != j]
    keys = vals[:, others]
    groups: dict[tuple, list] = {}
    for r, key in enumerate(map(tuple, keys)):
        groups.setdefault(key, []).append(r)
    return {key: np.asarray(groups[key]) for key in sorted(groups)}


def manipulation_variance(reps, factors: FactorTable, j: int, columns: Sequence[int] | None = None,
                          pca_dim: int | None = None, assignment: int | None = None) -> np.ndarray:
    """Per-dimension variance of the representation while only factor ``j`` moves.

    For each assignment of the other factors, the rows sweeping factor ``j``
    give one variance profile; profiles are averaged over assignments, or a
    single assignment (by position in sorted order) is used when given.

    Args:
        columns: restrict to these dimensions first (e.g. a Top-k selection).
        pca_dim: reduce to this many principal components first.
        assignment: index of one other-factor assignment instead of the average.
    """
    factors, reps = validate_pair(factors, reps)
    if not 0 <= j < factors.k:
        raise InputError(f"factor index {j} out of range")
    X = reps.values
    if columns is not None:
        X = X[:, np.asarray(columns, dtype=np.int64)]
    if pca_dim is not None:
        X = pca_reduce(X, pca_dim).values
    groups = list(grid_groups(factors, j).values())
    if assignment is not None:
        if not 0 <= assignment < len(groups):
            raise InputError(f"assignment {assignment} not in [0, {len(groups)})")
        groups = [groups[assignment]]
    profiles = np.stack([X[g].var(axis=0) for g in groups])
    return profiles.mean(axis=0)


def pca_reduce(reps, target_dim: int) -> RepresentationMatrix:
    """Project centered data on the top ``target_dim`` covariance eigenvectors.

    Each component is signed so its largest-magnitude loading is positive.
    Components beyond the numerical rank are zero (with a warning).
    """
    X = as_reps(reps).values
    n, d = X.shape
    if not 1 <= target_dim <= min(n, d):
        raise InputError(f"target_dim must be in [1, {min(n, d)}]")
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / n
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(-evals, kind="stable")
    evals, evecs = evals[order], evecs[:, order]
    tol = max(evals[0], 0.0) * max(n, d) * np.finfo(float).eps
    rank = int(np.sum(evals > tol))
    W = evecs[:, :target_dim].copy()
    for c in range(W.shape[1]):
        lead = np.argmax(np.abs(W[:, c]))
        if W[lead, c] < 0:
            W[:, c] = -W[:, c]
    Z = Xc @ W
    if target_dim > rank:
        warnings.warn(f"PCA target {target_dim} exceeds numerical rank {rank}; padding with zeros",
                      RankDeficientWarning, stacklevel=2)
        Z[:, rank:] = 0.0
    return RepresentationMatrix(Z)


def write_heatmap(imp: ImportanceMatrix, names: Sequence[str], path) -> None:
    """Write R transposed (K rows x D columns) as CSV; each row sums to 1 or is zero."""
    Rt = imp.R.T
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["factor"] + [f"dim{i}" for i in range(imp.d)])
        for name, row in zip(names, Rt):
            w.writerow([name] + [repr(float(x)) for x in row])
