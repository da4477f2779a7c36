"""Two-factor linear constructions with closed-form metric values.

Two binary factors, independent and uniform, enumerated exhaustively:

* ``duplicated``   c_i = v_(i mod 2)
* ``copy-average`` c_0 = v_0, c_1 = v_1, c_i = (v_0 + v_1) / 2 for i > 1
* ``weighted-mix`` c_0 = v_0/3 + 2 v_1/3, c_1 = v_1/3 + 2 v_0/3, rest as copy-average
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import FactorTable, RepresentationMatrix
from .errors import InputError, UnsupportedBase
from .mi import NATURAL
from .rng import Streams

KINDS = ("duplicated", "copy-average", "weighted-mix")
LN2 = math.log(2.0)


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    d: int
    replication: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown scenario {self.kind!r}; expected one of {KINDS}")
        min_d = 3 if self.kind == "copy-average" else 2
        if self.d < min_d:
            raise InputError(f"{self.kind} needs D >= {min_d}, got {self.d}")
        if self.replication < 1:
            raise InputError("replication must be >= 1")


def generate(spec: ScenarioSpec) -> tuple[FactorTable, RepresentationMatrix]:
    """All four factor combinations, each repeated ``replication`` times, and their codes."""
    grid = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.int64)
    v = np.tile(grid, (spec.replication, 1))
    v0, v1 = v[:, 0].astype(float), v[:, 1].astype(float)
    c = np.empty((len(v), spec.d))
    if spec.kind == "duplicated":
        for i in range(spec.d):
            c[:, i] = v0 if i % 2 == 0 else v1
    else:
        c[:, 2:] = ((v0 + v1) / 2.0)[:, None]
        if spec.kind == "copy-average":
            c[:, 0], c[:, 1] = v0, v1
        else:
            c[:, 0] = v0 / 3.0 + 2.0 * v1 / 3.0
            c[:, 1] = v1 / 3.0 + 2.0 * v0 / 3.0
    return FactorTable(v, ("F0", "F1"), (2, 2)), RepresentationMatrix(c)


def derivative_matrix(spec: ScenarioSpec) -> np.ndarray:
    """``|d c_i / d v_j|`` of the construction (D x 2)."""
    R = np.zeros((spec.d, 2))
    if spec.kind == "duplicated":
        R[np.arange(spec.d), np.arange(spec.d) % 2] = 1.0
        return R
    R[2:] = 0.5
    if spec.kind == "copy-average":
        R[0, 0] = R[1, 1] = 1.0
    else:
        R[0] = (1 / 3, 2 / 3)
        R[1] = (2 / 3, 1 / 3)
    return R


def analytic_med(spec: ScenarioSpec, base=NATURAL) -> float:
    """Closed-form MED (natural log) of a scenario."""
    if base != NATURAL:
        raise UnsupportedBase(f"closed forms are stated in natural log, not {base!r}")
    if spec.kind == "duplicated":
        return 1.0
    if spec.kind == "copy-average":
        return 1.0 - (spec.d - 2) / spec.d * LN2
    return 1.0 - LN2


def simplified_dci_importance(d: int, d0: int, d1: int) -> np.ndarray:
    """Copy-average derivative importances truncated to two nonzero rows per factor.

    Factor j keeps its own pure dimension (importance 1) and one averaged
    dimension ``d_j`` in ``[2, D-1]`` (importance 1/2).
    """
    if d < 3:
        raise InputError("simplified DCI needs D >= 3")
    if not (2 <= d0 < d and 2 <= d1 < d):
        raise InputError(f"picked dimensions must lie in [2, {d - 1}]")
    R = np.zeros((d, 2))
    R[0, 0] = R[1, 1] = 1.0
    R[d0, 0] = 0.5
    R[d1, 1] = 0.5
    return R


@dataclass(frozen=True)
class DCISummary:
    """Simplified-DCI distribution over the random picks ``(d_0, d_1)``.

    ``mean`` comes from the defining weighted sum; ``closed_form_mean`` is
    ``1 - log 2 / (D - 2)``, the expectation obtained when a shared pick is
    scored ``1 - log 2`` instead of its weighted-sum value ``1 - log 2 / 3``.  ``cases`` maps a case label to
    ``(value, count)``; in sample mode ``values`` holds one value per trial.
    """

    d: int
    mode: str
    mean: float
    closed_form_mean: float
    cases: dict = field(default_factory=dict)
    values: tuple = ()


def dci_closed_form(d: int) -> float:
    """``1 - log 2 / (D - 2)``; see :class:`DCISummary`."""
    return 1.0 - LN2 / (d - 2)


def simplified_dci(d: int, mode: str = "enumerate", seed: int = 0, trials: int = 10000,
                   base=NATURAL) -> DCISummary:
    """Expected DCI disentanglement under the sparsity-2 importance model.

    ``enumerate`` averages exactly over all ``(D-2)^2`` equally likely picks;
    picks that share the averaged dimension form one case, distinct picks the
    other, and every pick within a case has the same score.  ``sample`` draws
    ``trials`` picks from streams ``(seed, "simplified_dci", t)``.
    """
    from .baselines.dci import dci_from_importance

    if d < 3:
        raise InputError("simplified DCI needs D >= 3")
    m = d - 2
    if mode == "enumerate":
        same = dci_from_importance(simplified_dci_importance(d, 2, 2), base)
        cases = {"d0==d1": (same, m)}
        if m > 1:
            diff = dci_from_importance(simplified_dci_importance(d, 2, 3), base)
            cases["d0!=d1"] = (diff, m * (m - 1))
        total = m * m
        mean = math.fsum(v * c for v, c in cases.values()) / total
        return DCISummary(d, mode, mean, dci_closed_form(d), cases)
    if mode == "sample":
        if trials < 1:
            raise InputError("trials must be >= 1")
        st = Streams.from_seed(seed, "simplified_dci", trials)
        d0 = st.integers(m) + 2
        d1 = st.integers(m) + 2
        values = tuple(dci_from_importance(simplified_dci_importance(d, int(a), int(b)), base)
                       for a, b in zip(d0, d1))
        return DCISummary(d, mode, math.fsum(values) / trials, dci_closed_form(d), {}, values)
    raise InputError(f"unknown mode {mode!r}")


SWEEP_METRICS = ("med", "analytic_med", "topk_med", "mig", "sap", "dci_formula", "dci_closed_form")


def sweep(kind: str, dims: Sequence[int], metrics: Iterable[str] = ("med", "dci_formula", "dci_closed_form"),
          base=NATURAL, k: int = 1, replication: int = 1, seed: int = 0) -> list[tuple[str, int, str, float]]:
    """Rows ``(kind, D, metric, value)`` for every requested metric and dimension."""
    from .baselines import ProtocolParams, mig, sap
    from .med import med_score, topk_med

    metrics = list(metrics)
    for name in metrics:
        if name not in SWEEP_METRICS:
            raise InputError(f"unknown sweep metric {name!r}; expected one of {SWEEP_METRICS}")
        if name.startswith("dci") and kind != "copy-average":
            raise InputError("the simplified DCI model is defined for copy-average only")
    rows = []
    for d in dims:
        spec = ScenarioSpec(kind, int(d), replication)
        factors, reps = generate(spec) if any(n in metrics for n in ("med", "topk_med", "mig", "sap")) else (None, None)
        for name in metrics:
            if name == "med":
                value = med_score(reps, factors, base=base)
            elif name == "analytic_med":
                value = analytic_med(spec)
            elif name == "topk_med":
                value = topk_med(reps, factors, k, base=base)
            elif name == "mig":
                value = mig(reps, factors, base=base)
            elif name == "sap":
                value = sap(reps, factors, ProtocolParams(seed=seed))
            elif name == "dci_formula":
                value = simplified_dci(spec.d, base=base).mean
            else:
                value = dci_closed_form(spec.d)
            rows.append((kind, spec.d, name, float(value)))
    return rows


def write_sweep_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "D", "metric", "value"])
        for kind, d, metric, value in rows:
            w.writerow([kind, d, metric, repr(value)])
