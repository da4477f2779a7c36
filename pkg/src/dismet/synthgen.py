"""Synthetic factor grids and representation encoders."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import FactorTable, RepresentationMatrix
from .errors import GridTooLarge, InputError, ShapeMismatch
from .io import DatasetSpec, dataset_spec
from .rng import Streams, gaussian_matrix

MAX_GRID = 10**7
ENCODER_KINDS = ("identity", "duplicate", "linear-mix", "random-projection", "append-noise",
                 "append-constant")


def factor_grid(spec: DatasetSpec | str, mode: str = "full", n: int | None = None,
                seed: int = 0) -> FactorTable:
    """Factor table for a dataset spec.

    ``mode="full"`` enumerates the Cartesian product in row-major order (last
    factor varies fastest); ``mode="sample"`` draws ``n`` rows with every
    factor uniform and independent, row ``r`` from stream ``(seed, "factor_grid", r)``.
    """
    if isinstance(spec, str):
        spec = dataset_spec(spec)
    cards = spec.cardinalities
    if mode == "full":
        if spec.size > MAX_GRID:
            raise GridTooLarge(f"{spec.name}: {spec.size} combinations exceed {MAX_GRID}")
        grids = np.indices(cards).reshape(len(cards), -1).T
        return FactorTable(grids.astype(np.int64), spec.factor_names, cards)
    if mode == "sample":
        if n is None or n < 1:
            raise InputError("sample mode needs n >= 1")
        st = Streams.from_seed(seed, "factor_grid", n)
        cols = [st.integers(c) for c in cards]
        return FactorTable(np.stack(cols, axis=1), spec.factor_names, cards)
    raise InputError(f"unknown grid mode {mode!r}")


def grid_spec(cardinalities: Sequence[int], name: str = "grid") -> DatasetSpec:
    return DatasetSpec(name, tuple(f"f{j}" for j in range(len(cardinalities))), tuple(cardinalities))


@dataclass(frozen=True)
class EncoderSpec:
    """One encoding stage.

    ``params`` by kind: duplicate ``m``; linear-mix ``matrix`` (D x K);
    random-projection ``d``, ``seed``, ``nonlinearity`` ("none"|"tanh");
    append-noise ``count``, ``seed``; append-constant ``count``, ``value``.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ENCODER_KINDS:
            raise InputError(f"unknown encoder {self.kind!r}; expected one of {ENCODER_KINDS}")


def parse_encoder(text: str, seed: int = 0) -> list[EncoderSpec]:
    """Parse ``kind[:arg[:arg]]`` stages joined by ``+``.

    Examples: ``identity``, ``duplicate:2``, ``random-projection:1000:tanh``,
    ``identity+append-noise:5``, ``identity+append-constant:3``.
    """
    stages = []
    for part in text.split("+"):
        kind, *args = part.strip().split(":")
        if kind == "identity":
            stages.append(EncoderSpec(kind))
        elif kind == "duplicate":
            stages.append(EncoderSpec(kind, {"m": int(args[0]) if args else 2}))
        elif kind == "random-projection":
            if not args:
                raise InputError("random-projection needs a dimension, e.g. random-projection:1000")
            nl = args[1] if len(args) > 1 else "none"
            stages.append(EncoderSpec(kind, {"d": int(args[0]), "seed": seed, "nonlinearity": nl}))
        elif kind == "append-noise":
            stages.append(EncoderSpec(kind, {"count": int(args[0]) if args else 1, "seed": seed}))
        elif kind == "append-constant":
            stages.append(EncoderSpec(kind, {"count": int(args[0]) if args else 1}))
        elif kind == "linear-mix":
            if not args:
                raise InputError("linear-mix needs a matrix: linear-mix:a,b;c,d (rows ';', entries ',')")
            rows = [[float(x) for x in r.split(",")] for r in args[0].split(";")]
            stages.append(EncoderSpec(kind, {"matrix": rows}))
        else:
            raise InputError(f"unknown encoder {kind!r}")
    return stages


def _base_encoding(factors: FactorTable, spec: EncoderSpec) -> np.ndarray:
    v = factors.values.astype(np.float64)
    if spec.kind == "identity":
        return v
    if spec.kind == "duplicate":
        m = int(spec.params.get("m", 2))
        if m < 1:
            raise InputError("duplicate needs m >= 1")
        return np.tile(v, (1, m))
    if spec.kind == "linear-mix":
        M = np.asarray(spec.params["matrix"], dtype=np.float64)
        if M.ndim != 2 or M.shape[1] != factors.k:
            raise ShapeMismatch(f"mix matrix must be D x {factors.k}, got {M.shape}")
        return v @ M.T
    if spec.kind == "random-projection":
        d = int(spec.params["d"])
        if d < 1:
            raise InputError("projection dimension must be >= 1")
        width = sum(factors.cardinalities)
        onehot = np.zeros((factors.n, width))
        offset = 0
        for j, c in enumerate(factors.cardinalities):
            onehot[np.arange(factors.n), offset + factors.values[:, j]] = 1.0
            offset += c
        W = gaussian_matrix(int(spec.params.get("seed", 0)), "random_projection", width, d)
        Z = onehot @ W
        nl = spec.params.get("nonlinearity", "none")
        if nl == "tanh":
            Z = np.tanh(Z)
        elif nl != "none":
            raise InputError(f"unknown nonlinearity {nl!r}")
        return Z
    raise InputError(f"{spec.kind} is a modifier, not a base encoder")


def encode(factors: FactorTable, spec: EncoderSpec | Sequence[EncoderSpec]) -> RepresentationMatrix:
    """Encode factors into a representation.

    A sequence applies one base encoder followed by append-* modifiers.  The
    sequence may also start with a modifier, in which case identity is the base.
    """
    stages = [spec] if isinstance(spec, EncoderSpec) else list(spec)
    if not stages:
        raise InputError("empty encoder spec")
    if stages[0].kind.startswith("append-"):
        stages = [EncoderSpec("identity")] + stages
    Z = _base_encoding(factors, stages[0])
    for st in stages[1:]:
        if st.kind == "append-noise":
            count = int(st.params.get("count", 1))
            noise = gaussian_matrix(int(st.params.get("seed", 0)), "append_noise", factors.n, count)
            Z = np.hstack([Z, noise])
        elif st.kind == "append-constant":
            count = int(st.params.get("count", 1))
            Z = np.hstack([Z, np.full((factors.n, count), float(st.params.get("value", 0.0)))])
        else:
            raise InputError(f"{st.kind} can only be the first stage")
    return RepresentationMatrix(Z)
