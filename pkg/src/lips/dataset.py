"""Categorical datasets: loading, validation, dummy encoding and splitting."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

MISSING_TOKEN = "?"


class DatasetError(ValueError):
    """Raised for malformed or unusable input data."""


def _as_index(index) -> np.ndarray:
    index = np.asarray(index)
    return index if index.dtype == bool else index.astype(np.intp)


@dataclass(frozen=True)
class Variable:
    name: str
    levels: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.levels)) != len(self.levels):
            raise DatasetError(f"duplicate levels in variable {self.name!r}")
        if not self.levels:
            raise DatasetError(f"variable {self.name!r} has no levels")


@dataclass(frozen=True, eq=False)
class CategoricalDataset:
    """``n`` rows of ``p`` categorical variables plus a binary outcome.

    ``rows[i, j]`` is the level index of variable ``j`` in row ``i``. The
    outcome is coded so that 1 marks the class of interest (the minority
    class unless the caller overrode it at load time).
    """

    variables: tuple[Variable, ...]
    rows: np.ndarray
    outcome: np.ndarray
    class_labels: tuple[str, str] = ("0", "1")

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int32)
        outcome = np.asarray(self.outcome, dtype=np.int8)
        if rows.ndim != 2 or rows.shape[1] != len(self.variables):
            raise DatasetError("rows must be an n x p matrix matching the variable list")
        if outcome.shape != (rows.shape[0],):
            raise DatasetError("outcome length must equal the number of rows")
        if not np.isin(outcome, (0, 1)).all():
            raise DatasetError("outcome must contain only 0 and 1")
        if rows.shape[0] and not (outcome.any() and (outcome == 0).any()):
            raise DatasetError("both outcome classes must be non-empty")
        counts = np.array([len(v.levels) for v in self.variables], dtype=np.int32)
        if rows.size and ((rows < 0) | (rows >= counts)).any():
            raise DatasetError("cell value out of range for its variable")
        rows.setflags(write=False)
        outcome.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "outcome", outcome)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def p(self) -> int:
        return len(self.variables)

    @property
    def level_counts(self) -> tuple[int, ...]:
        return tuple(len(v.levels) for v in self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def subset(self, index) -> "CategoricalDataset":
        index = _as_index(index)
        return CategoricalDataset(self.variables, self.rows[index], self.outcome[index], self.class_labels)

    def term_label(self, var: int, level: int) -> str:
        v = self.variables[var]
        return f"{v.name}={v.levels[level]}"


@dataclass(frozen=True, eq=False)
class DummyMatrix:
    """One-hot (dummy) encoding of a dataset.

    ``bits`` is an ``n x d`` boolean matrix; column ``k`` is the indicator of
    level ``columns[k][1]`` of variable ``columns[k][0]``. Columns are laid
    out variable by variable, so ``offsets[j]`` is the first column of
    variable ``j``.
    """

    columns: tuple[tuple[int, int], ...]
    bits: np.ndarray
    level_counts: tuple[int, ...]
    _tidsets: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    @property
    def d(self) -> int:
        return self.bits.shape[1]

    @property
    def p(self) -> int:
        return len(self.level_counts)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.level_counts)[:-1])).astype(np.int64)

    def column_index(self, var: int, level: int) -> int:
        if not (0 <= var < self.p and 0 <= level < self.level_counts[var]):
            raise IndexError(f"dummy ({var}, {level}) out of range")
        return int(self.offsets[var]) + level

    def subset(self, index) -> "DummyMatrix":
        return DummyMatrix(self.columns, self.bits[_as_index(index)], self.level_counts)

    def tidsets(self) -> np.ndarray:
        """Per-dummy row bitsets, ``d x ceil(n/64)`` uint64 (bit i = row i)."""
        if "packed" not in self._tidsets:
            packed = np.packbits(self.bits.T, axis=1, bitorder="little")
            pad = (-packed.shape[1]) % 8
            if pad:
                packed = np.pad(packed, ((0, 0), (0, pad)))
            words = np.ascontiguousarray(packed).view(np.uint64)
            self._tidsets["packed"] = words.reshape(self.d, -1)
        return self._tidsets["packed"]


def encode_dummies(ds: CategoricalDataset) -> DummyMatrix:
    counts = ds.level_counts
    columns = tuple((j, l) for j, m in enumerate(counts) for l in range(m))
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1])).astype(np.int64)
    bits = np.zeros((ds.n, sum(counts)), dtype=bool)
    if ds.n:
        rr = np.repeat(np.arange(ds.n), ds.p)
        cc = (ds.rows + offsets).ravel()
        bits[rr, cc] = True
    bits.setflags(write=False)
    return DummyMatrix(columns, bits, tuple(counts))


def decode_dummies(dm: DummyMatrix) -> np.ndarray:
    """Inverse of :func:`encode_dummies`: recover the level-index matrix."""
    rows = np.empty((dm.n, dm.p), dtype=np.int32)
    for j, start in enumerate(dm.offsets):
        block = dm.bits[:, start:start + dm.level_counts[j]]
        if not (block.sum(axis=1) == 1).all():
            raise DatasetError(f"variable {j} is not one-hot")
        rows[:, j] = block.argmax(axis=1)
    return rows


def load_csv(
    path,
    label_column: str,
    missing_policy: str = "own_level",
    *,
    positive_label: str | None = None,
    header_names: Sequence[str] | None = None,
    delimiter: str = ",",
) -> CategoricalDataset:
    """Read a delimited categorical table.

    Levels are indexed in order of first appearance. The label is coded so
    that the minority class is 1 unless ``positive_label`` says otherwise;
    on an exact tie the label seen second is coded 1. The missing token
    ``"?"`` is either kept as its own level (``own_level``) or causes the row
    to be dropped (``drop_row``). ``header_names`` supplies column names for
    headerless files such as the raw UCI distributions.
    """
    if missing_policy not in ("own_level", "drop_row"):
        raise DatasetError(f"unknown missing policy {missing_policy!r}")
    try:
        with open(Path(path), newline="", encoding="utf-8") as fh:
            records = [r for r in csv.reader(fh, delimiter=delimiter) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc

    if header_names is not None:
        header = [h.strip() for h in header_names]
    elif records:
        header, records = [h.strip() for h in records[0]], records[1:]
    else:
        raise DatasetError(f"{path} is empty")
    if label_column not in header:
        raise DatasetError(f"label column {label_column!r} not found")
    width = len(header)
    records = [[c.strip() for c in r] for r in records]
    bad = [i for i, r in enumerate(records) if len(r) != width]
    if bad:
        raise DatasetError(f"row {bad[0] + 1} has the wrong number of fields")

    y_col = header.index(label_column)
    if missing_policy == "drop_row":
        records = [r for r in records if MISSING_TOKEN not in r]
    elif any(r[y_col] == MISSING_TOKEN for r in records):
        raise DatasetError("missing values in the label column")
    if not records:
        raise DatasetError("dataset is empty")

    labels = [r[y_col] for r in records]
    seen = list(dict.fromkeys(labels))
    if len(seen) != 2:
        raise DatasetError(f"label column must have exactly two values, found {len(seen)}")
    if positive_label is not None:
        if positive_label not in seen:
            raise DatasetError(f"positive label {positive_label!r} not present")
        pos = positive_label
    else:
        c0, c1 = labels.count(seen[0]), labels.count(seen[1])
        pos = seen[0] if c0 < c1 else seen[1]
    neg = seen[1] if pos == seen[0] else seen[0]

    feat_cols = [j for j in range(width) if j != y_col]
    variables = []
    rows = np.empty((len(records), len(feat_cols)), dtype=np.int32)
    for out_j, j in enumerate(feat_cols):
        levels = list(dict.fromkeys(r[j] for r in records))
        lookup = {lv: k for k, lv in enumerate(levels)}
        rows[:, out_j] = [lookup[r[j]] for r in records]
        variables.append(Variable(header[j], tuple(levels)))
    outcome = np.array([1 if lab == pos else 0 for lab in labels], dtype=np.int8)
    return CategoricalDataset(tuple(variables), rows, outcome, (neg, pos))


def write_csv(ds: CategoricalDataset, path, label_column: str = "y") -> None:
    """Write ``ds`` as a header-first CSV using level labels; outcome as 0/1."""
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*ds.names, label_column])
        for row, y in zip(ds.rows, ds.outcome):
            w.writerow([v.levels[k] for v, k in zip(ds.variables, row)] + [int(y)])


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def split_indices(
    outcome: np.ndarray,
    train_fraction: float,
    seed: int,
    stratified: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Sorted train and test row indices for a random partition."""
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError("train_fraction must lie in (0, 1)")
    outcome = np.asarray(outcome)
    n = outcome.shape[0]
    rng = np.random.default_rng(seed)
    if stratified:
        parts = []
        for cls in (1, 0):
            members = np.flatnonzero(outcome == cls)
            if members.size < 2:
                raise DatasetError(f"class {cls} has fewer than 2 rows; cannot stratify")
            k = min(max(_round_half_up(train_fraction * members.size), 1), members.size - 1)
            parts.append(rng.permutation(members)[:k])
        train = np.sort(np.concatenate(parts))
    else:
        train = np.sort(rng.permutation(n)[:_round_half_up(train_fraction * n)])
    mask = np.zeros(n, dtype=bool)
    mask[train] = True
    return train, np.flatnonzero(~mask)


def split(
    ds: CategoricalDataset,
    train_fraction: float,
    seed: int,
    stratified: bool = True,
) -> tuple[CategoricalDataset, CategoricalDataset]:
    """Random train/test partition; per-class sizes are rounded half-up."""
    train, test = split_indices(ds.outcome, train_fraction, seed, stratified)
    return ds.subset(train), ds.subset(test)


def class_partition(ds: CategoricalDataset) -> tuple[np.ndarray, np.ndarray]:
    """Indices of the outcome=1 rows and the outcome=0 rows."""
    return np.flatnonzero(ds.outcome == 1), np.flatnonzero(ds.outcome == 0)
