"""Histogram discretization, discrete entropy and mutual information.

All estimates are plug-in (count based) and exact for the empirical joint
distribution.  Per-cell terms are sorted before summation, so results do not
depend on label order or sample order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .core import FactorTable, validate_pair
from .errors import InputError, LengthMismatch

NATURAL = "natural"
BASE_K = "k"
BASES = (NATURAL, BASE_K)

DEFAULT_BINS = 20


def log_unit(base, k: int | None = None) -> float:
    """Divisor converting nats to ``base`` units.

    ``base`` is ``"natural"``, ``"k"`` (log base K, K = number of factors) or a
    number > 1 used as the log base directly.  Base-K with K = 1 degenerates;
    every entropy is then 0, and the unit is reported as 1.
    """
    if base == NATURAL or base is None:
        return 1.0
    if base == BASE_K:
        if k is None:
            raise InputError("base 'k' needs the number of factors")
        return math.log(k) if k > 1 else 1.0
    b = float(base)
    if not b > 1.0:
        raise InputError(f"entropy base must be > 1, got {base!r}")
    return math.log(b)


EDGE_TOL = 1e-9


def _bin_index(x: np.ndarray, lo, hi, bins: int) -> np.ndarray:
    # halving keeps hi - lo finite for columns spanning most of the float range
    with np.errstate(invalid="ignore", divide="ignore"):
        t = bins * ((x * 0.5 - lo * 0.5) / (hi * 0.5 - lo * 0.5))
    # positions within EDGE_TOL of a bin edge count as on it, so rounding in an
    # affine rescale cannot move a value across the edge
    r = np.rint(t)
    t = np.where(np.abs(t - r) <= EDGE_TOL, r, t)
    return np.minimum(np.floor(t).astype(np.int64), bins - 1)


def discretize(column, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Equal-width bin index of each value over ``[min, max]``.

    ``x`` maps to ``floor(bins * (x - min) / (max - min))`` clamped to
    ``bins - 1``; a constant column maps to bin 0.
    """
    x = np.asarray(column, dtype=np.float64)
    if bins < 1:
        raise InputError("bins must be positive")
    if x.size == 0:
        raise InputError("cannot discretize an empty column")
    lo, hi = x.min(), x.max()
    if not hi > lo:
        return np.zeros(x.shape, dtype=np.int64)
    return _bin_index(x, lo, hi, bins)


def discretize_matrix(values: np.ndarray, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Column-wise :func:`discretize` of an N x D matrix."""
    values = np.asarray(values, dtype=np.float64)
    lo = values.min(axis=0)
    hi = values.max(axis=0)
    flat = ~(hi > lo)
    idx = _bin_index(values, lo, np.where(flat, lo + 1.0, hi), bins)
    idx[:, flat] = 0
    return idx


def _entropy_from_counts(counts: np.ndarray) -> float:
    counts = np.sort(counts[counts > 0]).astype(np.float64)
    n = counts.sum()
    if n <= 0:
        return 0.0
    return max(math.log(n) - math.fsum(counts * np.log(counts)) / n, 0.0)


def discrete_entropy(labels, base=NATURAL) -> float:
    """Plug-in entropy ``-sum p log p`` of an integer label vector.

    ``base`` is ``"natural"`` or a numeric log base (pass K for base-K units).
    """
    labels = np.asarray(labels)
    if labels.size == 0:
        raise InputError("entropy of an empty vector")
    _, counts = np.unique(labels, return_counts=True)
    return _entropy_from_counts(counts) / log_unit(base)


def mutual_information(x, y, base=NATURAL) -> float:
    """Plug-in mutual information of two label vectors.

    Evaluated per nonzero cell of the sparse contingency table as
    ``(1/N) sum c log(N c / (a b))`` with exact integer products, which equals
    ``H(x) + H(y) - H(x, y)`` and is exactly 0 when the empirical joint
    factorizes.  Symmetric to the last bit; tiny negatives clamp to 0.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"label vectors differ: {x.shape} vs {y.shape}")
    if x.size == 0:
        raise InputError("mutual information of empty vectors")
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    xc = np.bincount(xi)
    yc = np.bincount(yi)
    ny = len(yc)
    codes, jc = np.unique(xi.astype(np.int64) * ny + yi, return_counts=True)
    mi = _mi_from_cells(jc.astype(np.int64), xc[codes // ny].astype(np.int64),
                        yc[codes % ny].astype(np.int64), x.size)
    return max(mi, 0.0) / log_unit(base)


@numba.njit(cache=True, nogil=True)
def _mi_from_cells(c, a, b, n):
    # c: joint counts of nonzero cells, a/b: their marginal counts
    t = np.empty(c.size)
    for i in range(c.size):
        t[i] = c[i] * np.log(float(n * c[i]) / float(a[i] * b[i]))
    t.sort()
    s = 0.0
    for i in range(t.size):
        s += t[i]
    return s / n


@numba.njit(cache=True, nogil=True)
def _mi_block(disc_t, factor_cols, cards, bins, out, lo, hi):
    # fills out[lo:hi, :] with MI(disc_t[i], factor_cols[:, j]) in nats
    n = disc_t.shape[1]
    k = factor_cols.shape[1]
    fcounts = []
    for j in range(k):
        fc = np.zeros(cards[j], dtype=np.int64)
        for r in range(n):
            fc[factor_cols[r, j]] += 1
        fcounts.append(fc)
    cells_c = np.empty(bins * cards.max(), dtype=np.int64)
    cells_a = np.empty_like(cells_c)
    cells_b = np.empty_like(cells_c)
    for i in range(lo, hi):
        x = disc_t[i]
        xc = np.zeros(bins, dtype=np.int64)
        for r in range(n):
            xc[x[r]] += 1
        for j in range(k):
            cj = cards[j]
            fc = fcounts[j]
            joint = np.zeros(bins * cj, dtype=np.int64)
            for r in range(n):
                joint[x[r] * cj + factor_cols[r, j]] += 1
            m = 0
            for cell in range(bins * cj):
                if joint[cell] > 0:
                    cells_c[m] = joint[cell]
                    cells_a[m] = xc[cell // cj]
                    cells_b[m] = fc[cell % cj]
                    m += 1
            v = _mi_from_cells(cells_c[:m], cells_a[:m], cells_b[:m], n)
            out[i, j] = v if v > 0.0 else 0.0


@dataclass(frozen=True, eq=False)
class MIMatrix:
    """D x K mutual information between representation dimensions and factors.

    ``values`` is expressed in ``base`` units (``"natural"`` = nats).
    """

    values: np.ndarray
    base: str = NATURAL

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get("DISMET_THREADS")
        workers = int(env) if env else 1
    return max(1, int(workers))


def mi_matrix(reps, factors: FactorTable, bins: int = DEFAULT_BINS, base=NATURAL,
              workers: int | None = None) -> MIMatrix:
    """Mutual information of every discretized dimension with every raw factor.

    Args:
        reps: N x D representation (array or RepresentationMatrix).
        factors: factor table with the same N.
        bins: equal-width bins per dimension.
        base: ``"natural"`` or ``"k"``.
        workers: threads; cells are computed independently so the result is
            bit-identical for any worker count.
    """
    if base not in BASES:
        raise InputError(f"unknown entropy base {base!r}; expected one of {BASES}")
    factors, reps = validate_pair(factors, reps)
    disc = np.ascontiguousarray(discretize_matrix(reps.values, bins).T)
    fvals = np.ascontiguousarray(factors.values)
    cards = np.asarray(factors.cardinalities, dtype=np.int64)
    d = disc.shape[0]
    out = np.zeros((d, factors.k))
    workers = resolve_workers(workers)
    if workers == 1 or d < 2:
        _mi_block(disc, fvals, cards, bins, out, 0, d)
    else:
        edges = np.linspace(0, d, min(workers, d) * 4 + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_mi_block, disc, fvals, cards, bins, out, int(a), int(b))
                       for a, b in zip(edges[:-1], edges[1:]) if b > a]
            for f in futures:
                f.result()
    if base == BASE_K:
        out = out / log_unit(BASE_K, factors.k)
    return MIMatrix(out, base)


def factor_entropies(factors: FactorTable, base=NATURAL) -> np.ndarray:
    unit = log_unit(base, factors.k)
    return np.array([discrete_entropy(factors.column(j)) / unit for j in range(factors.k)])
