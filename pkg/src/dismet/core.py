"""Data model shared by every metric: factor tables, representations, reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import (
    FactorOutOfRange,
    IndexOutOfRange,
    InputError,
    NonFiniteValue,
    RowMismatch,
    ShapeMismatch,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FactorTable:
    """N x K table of discrete ground-truth factor values.

    Attributes:
        values: integer matrix, row n holds the factor assignment of sample n.
        names: one label per factor.
        cardinalities: number of admissible values per factor.
    """

    values: np.ndarray
    names: tuple[str, ...]
    cardinalities: tuple[int, ...]

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2:
            raise ShapeMismatch(f"factor values must be 2-d, got shape {values.shape}")
        n, k = values.shape
        if n < 1 or k < 1:
            raise ShapeMismatch(f"factor table needs N >= 1 and K >= 1, got {values.shape}")
        if values.dtype.kind not in "iu":
            if values.dtype.kind == "f" and np.all(np.isfinite(values)) and np.all(values == np.round(values)):
                values = values.astype(np.int64)
            else:
                raise InputError("factor values must be integers")
        values = values.astype(np.int64, copy=False)
        names = tuple(str(s) for s in self.names)
        cards = tuple(int(c) for c in self.cardinalities)
        if len(names) != k or len(cards) != k:
            raise ShapeMismatch(f"expected {k} names and cardinalities, got {len(names)} and {len(cards)}")
        if any(c < 1 for c in cards):
            raise InputError("cardinalities must be positive")
        if np.any(values < 0):
            r, c = np.argwhere(values < 0)[0]
            raise FactorOutOfRange(f"row {r}, factor {names[c]!r}: negative value {values[r, c]}")
        over = values >= np.asarray(cards)[None, :]
        if np.any(over):
            r, c = np.argwhere(over)[0]
            raise FactorOutOfRange(
                f"row {r}, factor {names[c]!r}: value {values[r, c]} >= cardinality {cards[c]}"
            )
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "cardinalities", cards)

    @classmethod
    def from_values(cls, values, names: Sequence[str] | None = None, cardinalities: Sequence[int] | None = None):
        """Build a table, inferring names (``f0``, ``f1``...) and cardinalities (max + 1)."""
        values = np.asarray(values)
        if values.ndim == 1:
            values = values[:, None]
        k = values.shape[1]
        if names is None:
            names = [f"f{j}" for j in range(k)]
        if cardinalities is None:
            cardinalities = [int(values[:, j].max()) + 1 if len(values) else 1 for j in range(k)]
        return cls(values, tuple(names), tuple(cardinalities))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]

    def take(self, rows) -> FactorTable:
        return FactorTable(self.values[np.asarray(rows)], self.names, self.cardinalities)


@dataclass(frozen=True, eq=False)
class RepresentationMatrix:
    """N x D matrix of finite latent codes, row-aligned with a FactorTable."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ShapeMismatch(f"representation must be 2-d, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            r, c = np.argwhere(~np.isfinite(values))[0]
            raise NonFiniteValue(f"non-finite representation entry at row {r}, column {c}")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def columns(self, idx) -> RepresentationMatrix:
        return RepresentationMatrix(self.values[:, np.asarray(idx, dtype=np.int64)])


def as_reps(reps) -> RepresentationMatrix:
    if isinstance(reps, RepresentationMatrix):
        return reps
    return RepresentationMatrix(reps)


def validate_pair(factors: FactorTable, reps) -> tuple[FactorTable, RepresentationMatrix]:
    """Check a (factors, representation) pair and return it.

    Raises:
        RowMismatch: the two tables disagree on N.
        FactorOutOfRange, NonFiniteValue: a per-table invariant is violated.
    """
    if not isinstance(factors, FactorTable):
        raise InputError("factors must be a FactorTable")
    reps = as_reps(reps)
    # invariants re-checked; both types are immutable so this is cheap insurance
    if np.any(factors.values >= np.asarray(factors.cardinalities)[None, :]) or np.any(factors.values < 0):
        raise FactorOutOfRange("factor value outside [0, cardinality)")
    if not np.all(np.isfinite(reps.values)):
        raise NonFiniteValue("representation contains NaN or Inf")
    if factors.n != reps.n:
        raise RowMismatch(f"factor table has {factors.n} rows, representation has {reps.n}")
    return factors, reps


def indices_with_factor_fixed(factors: FactorTable, j: int, v: int) -> np.ndarray:
    """Ascending row indices whose factor ``j`` equals ``v``."""
    if not 0 <= j < factors.k:
        raise IndexOutOfRange(f"factor index {j} not in [0, {factors.k})")
    if not 0 <= v < factors.cardinalities[j]:
        raise IndexOutOfRange(f"value {v} not in [0, {factors.cardinalities[j]}) for factor {j}")
    return np.flatnonzero(factors.values[:, j] == v)


@dataclass(frozen=True)
class MetricReport:
    """Per-seed scores of one metric with their mean and population std."""

    metric: str
    scores: tuple[float, ...]
    mean: float
    std: float
    parameters: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        scores = tuple(float(s) for s in self.scores)
        if not scores:
            raise InputError("a report needs at least one score")
        if any(not (0.0 <= s <= 1.0) for s in scores):
            raise InputError(f"scores must lie in [0, 1], got {scores}")
        mean, std = summarize(scores)
        if self.mean != mean or self.std != std:
            raise InputError("mean/std do not match the per-seed scores")
        object.__setattr__(self, "scores", scores)

    @classmethod
    def from_scores(cls, metric: str, scores: Sequence[float], parameters: dict | None = None) -> MetricReport:
        scores = tuple(float(s) for s in scores)
        mean, std = summarize(scores)
        return cls(metric, scores, mean, std, dict(parameters or {}))

    @property
    def display(self) -> str:
        return f"{100 * self.mean:.1f} ({100 * self.std:.1f})"


def summarize(scores: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and population standard deviation, exactly rounded sums."""
    n = len(scores)
    mean = math.fsum(scores) / n
    var = math.fsum((s - mean) ** 2 for s in scores) / n
    return mean, math.sqrt(var)
