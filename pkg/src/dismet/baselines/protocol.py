"""Evaluation protocol constants and seeded sampling shared by the baselines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import FactorTable
from ..errors import InputError, InsufficientSamples
from ..rng import Streams, derive_keys, permutation


@dataclass(frozen=True)
class ProtocolParams:
    """Sampling constants of the reference metrics.

    ``prune_threshold`` is the FactorVAE ``prune_dims.threshold``; it is
    compared against each dimension's global variance.
    """

    batch_size: int = 64
    num_train: int = 10000
    num_eval: int = 5000
    prune_threshold: float = 0.06
    seed: int = 0

    def __post_init__(self):
        if min(self.batch_size, self.num_train, self.num_eval) < 1 or not self.prune_threshold > 0:
            raise InputError("protocol parameters must be positive")

    @classmethod
    def from_mapping(cls, m: dict) -> ProtocolParams:
        """Accepts the protocol's own key names, e.g. ``prune_dims.threshold``."""
        aliases = {"prune_dims.threshold": "prune_threshold", "batch": "batch_size"}
        kwargs = {aliases.get(k, k): v for k, v in m.items()}
        return cls(**kwargs)


@dataclass(frozen=True, eq=False)
class ValueGroups:
    """Rows grouped by (factor, value), flattened for vectorized gathers."""

    flat: np.ndarray  # row indices, grouped
    offsets: np.ndarray  # start of each group in ``flat``
    sizes: np.ndarray
    factor_start: np.ndarray  # first group id of each factor
    factor_count: np.ndarray  # number of observed values per factor


def value_groups(factors: FactorTable, min_size: int = 1) -> ValueGroups:
    flat, offsets, sizes, fstart, fcount = [], [], [], [], []
    pos = 0
    for j in range(factors.k):
        col = factors.values[:, j]
        fstart.append(len(sizes))
        vals = np.unique(col)
        fcount.append(len(vals))
        for v in vals:
            rows = np.flatnonzero(col == v)
            if len(rows) < min_size:
                raise InsufficientSamples(
                    f"factor {factors.names[j]!r} value {v} has {len(rows)} rows, need {min_size}"
                )
            flat.append(rows)
            offsets.append(pos)
            sizes.append(len(rows))
            pos += len(rows)
    return ValueGroups(np.concatenate(flat), np.asarray(offsets), np.asarray(sizes),
                       np.asarray(fstart), np.asarray(fcount))


def fixed_factor_draws(factors: FactorTable, seed: int, tag: str, start: int, count: int,
                       batch_size: int, n_batches: int, groups: ValueGroups):
    """Draws ``start .. start+count-1`` of a fixed-factor sampling stream.

    Each draw uses stream ``(seed, tag, draw index)``: a factor uniformly, one
    of its observed values uniformly, then ``n_batches * batch_size`` rows with
    replacement from the rows carrying that value.

    Returns:
        factor index per draw (count,), row indices (n_batches, count, batch_size).
    """
    st = Streams(derive_keys(seed, tag, np.arange(start, start + count)))
    k = st.integers(factors.k)
    vi = st.integers(groups.factor_count[k])
    g = groups.factor_start[k] + vi
    off, size = groups.offsets[g], groups.sizes[g]
    rows = np.empty((n_batches, count, batch_size), dtype=np.int64)
    for b in range(n_batches):
        for s in range(batch_size):
            rows[b, :, s] = groups.flat[off + st.integers(size)]
    return k, rows


def split_indices(n: int, seed: int, tag: str, train_fraction: float) -> tuple[np.ndarray, np.ndarray]:
    """Seeded train/eval split of ``range(n)``."""
    perm = permutation(seed, tag, n)
    n_train = int(round(train_fraction * n))
    n_train = min(max(n_train, 1), n - 1)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def protocol_split(n: int, params: ProtocolParams, tag: str) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint train/eval rows: ``num_train``/``num_eval`` rows when available,
    otherwise the same 2:1 proportion of the whole table."""
    if n < 2:
        raise InputError("need at least two rows to split")
    perm = permutation(params.seed, tag, n)
    if n >= params.num_train + params.num_eval:
        tr, ev = perm[: params.num_train], perm[params.num_train: params.num_train + params.num_eval]
    else:
        n_train = int(round(n * params.num_train / (params.num_train + params.num_eval)))
        n_train = min(max(n_train, 1), n - 1)
        tr, ev = perm[:n_train], perm[n_train:]
    return np.sort(tr), np.sort(ev)
