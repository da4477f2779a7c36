"""Persistence: factor CSV, DREP binary representations, JSON reports, dataset specs.

DREP layout (little-endian throughout)::

    offset  size  field
    0       4     magic b"DREP"
    4       4     version, uint32 (= 1)
    8       8     N, uint64
    16      8     D, uint64
    24      8*N*D float64 values, row-major
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import FactorTable, MetricReport, RepresentationMatrix, as_reps
from .errors import (
    BadMagic,
    FactorOutOfRange,
    IOFailure,
    InputError,
    ParseError,
    TruncatedFile,
    VersionUnsupported,
)

DREP_MAGIC = b"DREP"
DREP_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    factor_names: tuple[str, ...]
    cardinalities: tuple[int, ...]

    @property
    def size(self) -> int:
        n = 1
        for c in self.cardinalities:
            n *= c
        return n


DATASETS: dict[str, DatasetSpec] = {
    "dsprites": DatasetSpec(
        "dsprites",
        ("shape", "scale", "orientation", "position_x", "position_y"),
        (3, 6, 40, 32, 32),
    ),
    "shapes3d": DatasetSpec(
        "shapes3d",
        ("floor_hue", "wall_hue", "object_hue", "scale", "orientation", "shape"),
        (10, 10, 10, 8, 15, 4),
    ),
    "cars3d": DatasetSpec("cars3d", ("elevation", "azimuth", "object_id"), (4, 24, 183)),
    "smallnorb": DatasetSpec(
        "smallnorb", ("category", "elevation", "azimuth", "lighting"), (10, 9, 18, 6)
    ),
    "celeba": DatasetSpec(
        "celeba", tuple(f"attribute_{i:02d}" for i in range(40)), (2,) * 40
    ),
}


def dataset_spec(name: str) -> DatasetSpec:
    try:
        return DATASETS[name.lower()]
    except KeyError:
        raise InputError(f"unknown dataset {name!r}; known: {', '.join(DATASETS)}") from None


def read_factors(path) -> FactorTable:
    """Read a factor CSV whose header cells are ``name:cardinality``.

    Raises:
        ParseError: malformed header or body, with the 1-based line number.
        FactorOutOfRange: a value is negative or >= its cardinality.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise IOFailure(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        names, cards = [], []
        for cell in header:
            name, sep, card = cell.strip().rpartition(":")
            if not sep or not name:
                raise ParseError(f"header cell {cell!r} is not name:cardinality", line=1)
            try:
                c = int(card)
            except ValueError:
                raise ParseError(f"cardinality {card!r} is not an integer", line=1) from None
            if c < 1:
                raise ParseError(f"cardinality must be positive in {cell!r}", line=1)
            names.append(name)
            cards.append(c)
        rows = []
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(names):
                raise ParseError(f"expected {len(names)} fields, got {len(row)}", line=line)
            try:
                vals = [int(cell) for cell in row]
            except ValueError:
                raise ParseError(f"non-integer field in {row!r}", line=line) from None
            for j, v in enumerate(vals):
                if not 0 <= v < cards[j]:
                    raise FactorOutOfRange(
                        f"line {line}: factor {names[j]!r} value {v} outside [0, {cards[j]})"
                    )
            rows.append(vals)
    if not rows:
        raise ParseError("no data rows (N >= 1 required)", line=2)
    return FactorTable(np.asarray(rows, dtype=np.int64), tuple(names), tuple(cards))


def write_factors(factors: FactorTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{n}:{c}" for n, c in zip(factors.names, factors.cardinalities)])
        w.writerows(factors.values.tolist())


def write_reps(reps, path) -> None:
    values = np.ascontiguousarray(as_reps(reps).values, dtype="<f8")
    n, d = values.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(DREP_MAGIC, DREP_VERSION, n, d))
        fh.write(values.tobytes(order="C"))


def read_reps(path) -> RepresentationMatrix:
    """Read a DREP file.

    Raises:
        TruncatedFile: fewer bytes than the header or the declared payload.
        BadMagic: the first four bytes are not ``DREP``.
        VersionUnsupported: version field is not 1.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc
    if len(data) < 4:
        raise TruncatedFile(f"{path}: {len(data)} bytes, header needs {_HEADER.size}")
    if data[:4] != DREP_MAGIC:
        raise BadMagic(f"{path}: magic {data[:4]!r} at offset 0, expected {DREP_MAGIC!r}")
    if len(data) < _HEADER.size:
        raise TruncatedFile(f"{path}: {len(data)} bytes, header needs {_HEADER.size}")
    _, version, n, d = _HEADER.unpack_from(data)
    if version != DREP_VERSION:
        raise VersionUnsupported(f"{path}: version {version} at offset 4, supported {DREP_VERSION}")
    need = _HEADER.size + 8 * n * d
    if len(data) < need:
        raise TruncatedFile(f"{path}: {len(data)} bytes, payload needs {need}")
    if len(data) > need:
        raise InputError(f"{path}: {len(data) - need} trailing bytes after offset {need}")
    values = np.frombuffer(data, dtype="<f8", count=n * d, offset=_HEADER.size).reshape(n, d)
    return RepresentationMatrix(values.astype(np.float64))


def _report_dict(r: MetricReport) -> dict:
    return {
        "metric": r.metric,
        "scores": list(r.scores),
        "mean": r.mean,
        "std": r.std,
        "display": r.display,
        "parameters": r.parameters,
    }


def dumps_reports(reports: Sequence[MetricReport]) -> str:
    return json.dumps([_report_dict(r) for r in reports], indent=2, sort_keys=False) + "\n"


def write_report(reports: Sequence[MetricReport], path) -> None:
    text = dumps_reports(reports)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def read_report(path) -> list[MetricReport]:
    items = json.loads(Path(path).read_text())
    return [MetricReport(d["metric"], tuple(d["scores"]), d["mean"], d["std"], d.get("parameters", {}))
            for d in items]
