"""Mutual Information Gap."""

from __future__ import annotations

import numpy as np

from ..core import FactorTable
from ..mi import DEFAULT_BINS, NATURAL, factor_entropies, mi_matrix


def mig(reps, factors: FactorTable, bins: int = DEFAULT_BINS, base=NATURAL,
        workers: int | None = None) -> float:
    """Mean over factors of the gap between the two most informative dimensions,
    normalized by the factor entropy.

    Factors with zero entropy are left out of the average; with no informative
    factor the score is 0.  A one-dimensional code has a second-best MI of 0.
    """
    mi = mi_matrix(reps, factors, bins, base, workers).values
    H = factor_entropies(factors, base)
    gaps = []
    for j in range(factors.k):
        if not H[j] > 0:
            continue
        col = np.sort(mi[:, j])[::-1]
        second = col[1] if col.size > 1 else 0.0
        gaps.append((col[0] - second) / H[j])
    if not gaps:
        return 0.0
    return float(np.clip(np.mean(gaps), 0.0, 1.0))
