"""Column-oriented datasets, CSV I/O and design-matrix encoding."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dag import VarType
from .errors import (
    CategoryOutOfRangeError,
    ColumnMissingError,
    DataError,
    MissingValueError,
    ParseError,
    RaggedRowError,
    TypeViolationError,
    UnknownColumnError,
)

_MISSING_TOKENS = {"", "na", "nan", "n/a", "null", "none"}


class Dataset:
    """Immutable table of named float64 columns.

    Binary and categorical variables are stored as integral-valued floats.
    ``meta`` is a free-form dict used by interventional outputs (warnings,
    class probabilities); it does not take part in equality.
    """

    def __init__(self, columns: Mapping[str, Iterable[float]], meta: dict | None = None):
        cols: dict[str, np.ndarray] = {}
        n = None
        for name in columns:
            arr = np.asarray(columns[name], dtype=np.float64)
            if arr.ndim != 1:
                arr = arr.reshape(-1)
            if arr.flags.writeable:
                arr = arr.copy()
            if n is None:
                n = arr.shape[0]
            elif arr.shape[0] != n:
                raise DataError(
                    f"column {name!r} has {arr.shape[0]} rows, expected {n}"
                )
            if not np.all(np.isfinite(arr)):
                raise MissingValueError(f"column {name!r} contains NaN or infinite values")
            arr.setflags(write=False)
            cols[str(name)] = arr
        self._cols = cols
        self._n = 0 if n is None else n
        self.meta = dict(meta or {})

    @classmethod
    def from_frame(cls, frame) -> "Dataset":
        """Build from anything indexable by column name with a ``columns`` attribute."""
        return cls({str(c): np.asarray(frame[c], dtype=float) for c in frame.columns})

    @property
    def names(self) -> list[str]:
        return list(self._cols)

    @property
    def n_rows(self) -> int:
        return self._n

    def __len__(self):
        return self._n

    def __contains__(self, name):
        return name in self._cols

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._cols[name]
        except KeyError:
            raise UnknownColumnError(f"no column {name!r}") from None

    def __eq__(self, other):
        if not isinstance(other, Dataset) or self.names != other.names:
            return False
        return all(np.array_equal(self._cols[c], other._cols[c]) for c in self._cols)

    def __repr__(self):
        return f"Dataset(n_rows={self._n}, columns={self.names})"

    def with_columns(self, updates: Mapping[str, Iterable[float]], meta=None) -> "Dataset":
        """Copy with some columns replaced (or appended); untouched columns are shared."""
        cols = dict(self._cols)
        for name, values in updates.items():
            arr = np.asarray(values, dtype=np.float64)
            if arr.ndim == 0:
                arr = np.full(self._n, float(arr))
            cols[name] = arr
        return Dataset(cols, meta=self.meta if meta is None else meta)

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset({c: v[rows] for c, v in self._cols.items()})

    def select(self, names: Sequence[str]) -> "Dataset":
        require_columns(self, names)
        return Dataset({c: self._cols[c] for c in names})

    def to_dict(self) -> dict[str, np.ndarray]:
        return dict(self._cols)

    def to_array(self, names: Sequence[str] | None = None) -> np.ndarray:
        names = self.names if names is None else list(names)
        require_columns(self, names)
        if not names:
            return np.empty((self._n, 0))
        return np.column_stack([self._cols[c] for c in names])

    def check_types(self, var_types: Mapping[str, VarType]) -> None:
        """Raise :class:`TypeViolationError` if a column breaks its variable type."""
        for name, vt in var_types.items():
            check_values(self[name], vt, name)


def require_columns(data: Dataset, names: Iterable[str]) -> None:
    missing = [c for c in names if c not in data]
    if missing:
        raise ColumnMissingError(f"dataset lacks columns {missing}")


def check_values(values: np.ndarray, vt: VarType, name: str = "value") -> None:
    values = np.asarray(values, dtype=float)
    if vt.kind == "bin":
        bad = ~np.isin(values, (0.0, 1.0))
        if bad.any():
            raise TypeViolationError(
                f"{name}: binary variable has value {values[bad][0]!r} outside {{0, 1}}"
            )
    elif vt.kind == "cat":
        bad = (values != np.round(values)) | (values < 0) | (values >= vt.n_categories)
        if bad.any():
            raise TypeViolationError(
                f"{name}: categorical code {values[bad][0]!r} outside 0..{vt.n_categories - 1}"
            )


# --------------------------------------------------------------------------- csv

def _parse_cell(text: str, row: int, col: str) -> float:
    token = text.strip()
    if token.lower() in _MISSING_TOKENS:
        raise MissingValueError(f"missing value at row {row}, column {col!r}")
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"cannot parse {text!r} at row {row}, column {col!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r} at row {row}, column {col!r}")
    return value


def read_csv(path) -> Dataset:
    """Read a comma-separated file with a header row of unique column names.

    Row numbers in error messages count the header as row 1.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header) or any(not h for h in header):
            raise ParseError(f"{path}: header names must be unique and non-empty")
        data: list[list[float]] = [[] for _ in header]
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise RaggedRowError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}"
                )
            for j, cell in enumerate(row):
                data[j].append(_parse_cell(cell, lineno, header[j]))
    return Dataset({h: np.array(v, dtype=float) for h, v in zip(header, data)})


def write_csv(dataset: Dataset, path) -> None:
    """Write ``dataset`` to a path or open text stream.

    Values use 17 significant digits so reads round-trip exactly.
    """
    if hasattr(path, "write"):
        _write_rows(dataset, path)
        return
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            _write_rows(dataset, fh)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from None


def _write_rows(dataset: Dataset, fh) -> None:
    names = dataset.names
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(names)
    cols = [dataset[c] for c in names]
    for i in range(dataset.n_rows):
        writer.writerow([format(float(c[i]), ".17g") for c in cols])


# ---------------------------------------------------------------------- encoding

def encode(values: np.ndarray, vt: VarType, name: str = "value") -> np.ndarray:
    """Encode one variable as an ``(n, vt.width)`` block; categoricals become one-hot."""
    values = np.asarray(values, dtype=float)
    if vt.kind != "cat":
        return values.reshape(-1, 1)
    codes = np.round(values)
    bad = (codes != values) | (codes < 0) | (codes >= vt.n_categories)
    if bad.any():
        raise CategoryOutOfRangeError(
            f"{name}: code {values[bad][0]!r} outside 0..{vt.n_categories - 1}"
        )
    out = np.zeros((values.shape[0], vt.n_categories))
    out[np.arange(values.shape[0]), codes.astype(int)] = 1.0
    return out


def design_layout(predictors: Sequence[tuple[str, VarType]]) -> np.ndarray:
    """Boolean mask over design columns marking continuous predictors."""
    mask: list[bool] = []
    for _, vt in predictors:
        mask.extend([vt.kind == "cont"] * vt.width)
    return np.array(mask, dtype=bool)


def design_matrix(dataset: Dataset, predictors: Sequence[tuple[str, VarType]]) -> np.ndarray:
    """Stack encoded predictor blocks in the given order."""
    require_columns(dataset, [name for name, _ in predictors])
    if not predictors:
        return np.empty((dataset.n_rows, 0))
    return np.hstack([encode(dataset[name], vt, name) for name, vt in predictors])


@dataclass(frozen=True)
class Standardizer:
    """Per-column centring and scaling of the continuous columns of a matrix."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray, continuous: np.ndarray | None = None) -> "Standardizer":
        X = np.asarray(X, dtype=float)
        p = X.shape[1]
        if continuous is None:
            continuous = np.ones(p, dtype=bool)
        mean = np.zeros(p)
        scale = np.ones(p)
        if X.shape[0]:
            mean[continuous] = X[:, continuous].mean(axis=0)
            sd = X[:, continuous].std(axis=0)
            scale[continuous] = np.where(sd > 0, sd, 1.0)
        return cls(mean, scale)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    def inverse_transform(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.scale + self.mean
