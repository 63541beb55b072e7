"""Reading and writing datasets and ground-truth labels.

Datasets are held as a ``d x n`` matrix: features are rows and points
(cells) are columns.  Dense files are delimited text; sparse files use the
Matrix Market coordinate format with optional 10x-style id files.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import (
    DimensionMismatch,
    DuplicateId,
    EmptyInput,
    FormatError,
    InvalidInput,
    InvalidParameter,
    ParseError,
)

FEATURES_AS_ROWS = "features-as-rows"
POINTS_AS_ROWS = "points-as-rows"


def _synth_ids(prefix, count):
    return tuple(f"{prefix}{i:06d}" for i in range(1, count + 1))


@dataclass(frozen=True)
class DataMatrix:
    """A ``d x n`` numeric dataset with one column per point.

    ``values`` is either a dense ``ndarray`` or a ``scipy.sparse`` CSC
    matrix.  Instances are treated as immutable once built.
    """

    values: np.ndarray | sp.spmatrix
    point_ids: tuple[str, ...]
    feature_ids: tuple[str, ...] | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = self.values
        if sp.issparse(values):
            values = sp.csc_matrix(values, dtype=np.float64)
            data = values.data
        else:
            values = np.asarray(values, dtype=np.float64)
            if values.ndim != 2:
                raise DimensionMismatch(f"expected a 2-d matrix, got shape {values.shape}")
            data = values
        object.__setattr__(self, "values", values)
        d, n = values.shape
        point_ids = tuple(str(p) for p in self.point_ids)
        object.__setattr__(self, "point_ids", point_ids)
        if len(point_ids) != n:
            raise DimensionMismatch(f"{len(point_ids)} point ids for {n} points")
        if len(set(point_ids)) != n:
            seen = set()
            for p in point_ids:
                if p in seen:
                    raise DuplicateId(p)
                seen.add(p)
        if self.feature_ids is not None:
            feature_ids = tuple(str(f) for f in self.feature_ids)
            object.__setattr__(self, "feature_ids", feature_ids)
            if len(feature_ids) != d:
                raise DimensionMismatch(f"{len(feature_ids)} feature ids for {d} features")
        if not np.all(np.isfinite(data)):
            raise InvalidInput("matrix contains non-finite entries")

    @property
    def n_features(self) -> int:
        return self.values.shape[0]

    @property
    def n_points(self) -> int:
        return self.values.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.values)

    def dense(self) -> np.ndarray:
        """Return the values as a dense float64 array (no copy when already dense)."""
        if self.is_sparse:
            return self.values.toarray()
        return self.values

    def subset(self, columns) -> "DataMatrix":
        columns = np.asarray(columns, dtype=np.intp)
        values = self.values[:, columns]
        ids = tuple(self.point_ids[c] for c in columns)
        return DataMatrix(values, ids, self.feature_ids)


@dataclass(frozen=True)
class GroundTruth:
    """Reference clustering: point id -> cluster index in ``1..k``."""

    labels: dict[str, int]
    k: int
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParameter("ground truth needs k >= 1")
        for pid, lab in self.labels.items():
            if not 1 <= lab <= self.k:
                raise InvalidParameter(f"label {lab} of {pid!r} outside 1..{self.k}")

    @classmethod
    def from_array(cls, labels, point_ids=None, names=None) -> "GroundTruth":
        """Build from a per-point integer array using 1-based cluster indices.

        Entries ``<= 0`` mean unlabeled.
        """
        labels = np.asarray(labels, dtype=np.int64)
        if point_ids is None:
            point_ids = [str(i) for i in range(len(labels))]
        mapping = {str(p): int(v) for p, v in zip(point_ids, labels) if v > 0}
        k = int(labels.max()) if len(labels) else 0
        return cls(mapping, max(k, 1), tuple(names or ()))

    def to_array(self, point_ids) -> np.ndarray:
        """Per-point label array aligned to ``point_ids``; 0 marks unlabeled points."""
        return np.array([self.labels.get(p, 0) for p in point_ids], dtype=np.int64)


def _is_float(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def _detect_delimiter(line):
    return "\t" if "\t" in line else ","


def _read_rows(path):
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines()]
    # trailing blank lines are common; interior blank lines are not data
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines or not any(ln.strip() for ln in lines):
        raise EmptyInput(f"{path} is empty")
    delim = _detect_delimiter(lines[0])
    return [[c.strip() for c in ln.split(delim)] for ln in lines]


def load_dense_matrix(path, orientation: str = FEATURES_AS_ROWS) -> DataMatrix:
    """Load a comma- or tab-delimited numeric table.

    A header row is recognized when any of its cells after the first is
    non-numeric; an identifier column is recognized when the first cell of
    the first data row is non-numeric.  With ``points-as-rows`` the table is
    transposed so the result is always ``d x n``.
    """
    if orientation not in (FEATURES_AS_ROWS, POINTS_AS_ROWS):
        raise InvalidParameter(f"unknown orientation {orientation!r}")
    rows = _read_rows(path)
    first = rows[0]
    has_header = (len(first) == 1 and not _is_float(first[0])) or not all(
        _is_float(c) for c in first[1:]
    )
    body_start = 1 if has_header else 0
    body = rows[body_start:]
    if not body:
        raise EmptyInput(f"{path} has a header but no data rows")
    has_index = not _is_float(body[0][0])
    width = len(body[0])
    values = np.empty((len(body), width - int(has_index)), dtype=np.float64)
    row_ids = []
    for r, row in enumerate(body):
        line_no = r + body_start + 1
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", line=line_no)
        cells = row
        if has_index:
            row_ids.append(row[0])
            cells = row[1:]
        for c, token in enumerate(cells):
            try:
                values[r, c] = float(token)
            except ValueError:
                raise ParseError(
                    f"non-numeric cell {token!r}", line=line_no, column=c + 1 + int(has_index)
                ) from None
    col_ids = None
    if has_header:
        col_ids = first[1:] if has_index and len(first) == width else first
        if len(col_ids) != values.shape[1]:
            raise ParseError(
                f"header has {len(first)} fields for {width} data fields", line=1
            )
    row_ids = row_ids or None
    if orientation == POINTS_AS_ROWS:
        values = values.T
        point_ids, feature_ids = row_ids, col_ids
    else:
        point_ids, feature_ids = col_ids, row_ids
    d, n = values.shape
    if point_ids is None:
        point_ids = _synth_ids("p", n)
    return DataMatrix(np.ascontiguousarray(values), tuple(point_ids), tuple(feature_ids) if feature_ids else None)


def write_dense_matrix(path, m: DataMatrix, orientation: str = FEATURES_AS_ROWS, delimiter: str = ",") -> None:
    """Write ``m`` with a header row and an id column; floats use ``repr`` so reads are exact."""
    values = m.dense()
    feature_ids = m.feature_ids or _synth_ids("f", m.n_features)
    if orientation == POINTS_AS_ROWS:
        values = values.T
        header, index = feature_ids, m.point_ids
        corner = "point"
    else:
        header, index = m.point_ids, feature_ids
        corner = "feature"
    with open(path, "w") as fh:
        fh.write(delimiter.join([corner, *header]) + "\n")
        for rid, row in zip(index, values):
            fh.write(delimiter.join([rid, *(repr(float(x)) for x in row)]) + "\n")


def _read_id_file(path):
    ids = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            ids.append(line.split("\t")[0].strip())
    return ids


def load_sparse_matrix(matrix_path, ids_path=None, features_path=None) -> DataMatrix:
    """Load a Matrix Market coordinate file (rows = features, columns = points).

    ``ids_path`` holds one point id per line and ``features_path`` one
    feature id per line (first tab-separated field).  Missing point ids are
    synthesized as ``p000001``, ``p000002``, ... in column order.
    """
    lines = Path(matrix_path).read_text().splitlines()
    if not lines:
        raise EmptyInput(f"{matrix_path} is empty")
    banner = lines[0].split()
    if len(banner) < 3 or banner[0].lower() != "%%matrixmarket" or banner[1].lower() != "matrix":
        raise FormatError("missing '%%MatrixMarket matrix' banner")
    if banner[2].lower() != "coordinate":
        raise FormatError(f"only coordinate format is supported, got {banner[2]!r}")
    field_kind = banner[3].lower() if len(banner) > 3 else "real"
    if field_kind not in ("real", "integer", "pattern", "double"):
        raise FormatError(f"unsupported field {field_kind!r}")
    symmetry = banner[4].lower() if len(banner) > 4 else "general"
    if symmetry != "general":
        raise FormatError(f"unsupported symmetry {symmetry!r}")
    pos = 1
    while pos < len(lines) and (not lines[pos].strip() or lines[pos].lstrip().startswith("%")):
        pos += 1
    if pos == len(lines):
        raise FormatError("missing size line")
    try:
        n_rows, n_cols, nnz = (int(t) for t in lines[pos].split())
    except ValueError:
        raise FormatError(f"bad size line {lines[pos]!r}") from None
    entries = [ln.split() for ln in lines[pos + 1:] if ln.strip() and not ln.lstrip().startswith("%")]
    if len(entries) != nnz:
        raise FormatError(f"declared {nnz} entries, found {len(entries)}")
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.ones(nnz, dtype=np.float64)
    expected = 2 if field_kind == "pattern" else 3
    for e, parts in enumerate(entries):
        if len(parts) != expected:
            raise FormatError(f"entry {e + 1}: expected {expected} fields, found {len(parts)}")
        try:
            r, c = int(parts[0]), int(parts[1])
            if expected == 3:
                vals[e] = float(parts[2])
        except ValueError:
            raise FormatError(f"entry {e + 1}: malformed {' '.join(parts)!r}") from None
        if not (1 <= r <= n_rows and 1 <= c <= n_cols):
            raise FormatError(f"entry {e + 1}: index ({r}, {c}) outside {n_rows} x {n_cols}")
        rows[e] = r - 1
        cols[e] = c - 1
    values = sp.csc_matrix((vals, (rows, cols)), shape=(n_rows, n_cols))
    values.sort_indices()
    if ids_path is not None:
        point_ids = _read_id_file(ids_path)
        if len(point_ids) != n_cols:
            raise DimensionMismatch(f"{len(point_ids)} ids for {n_cols} columns")
    else:
        point_ids = _synth_ids("p", n_cols)
    feature_ids = None
    if features_path is not None:
        feature_ids = _read_id_file(features_path)
        if len(feature_ids) != n_rows:
            raise DimensionMismatch(f"{len(feature_ids)} feature ids for {n_rows} rows")
    return DataMatrix(values, tuple(point_ids), tuple(feature_ids) if feature_ids else None)


def write_sparse_matrix(matrix_path, m: DataMatrix, ids_path=None, features_path=None) -> None:
    """Write ``m`` as a Matrix Market coordinate file, column-major entry order."""
    values = sp.csc_matrix(m.values)
    values.sort_indices()
    coo = values.tocoo()
    order = np.lexsort((coo.row, coo.col))
    integral = bool(np.all(np.mod(coo.data, 1) == 0)) and (
        coo.data.size == 0 or np.max(np.abs(coo.data)) < 2**53
    )
    field_kind = "integer" if integral else "real"
    with open(matrix_path, "w") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate {field_kind} general\n")
        fh.write(f"{values.shape[0]} {values.shape[1]} {coo.nnz}\n")
        for e in order:
            v = coo.data[e]
            text = str(int(v)) if integral else repr(float(v))
            fh.write(f"{coo.row[e] + 1} {coo.col[e] + 1} {text}\n")
    if ids_path is not None:
        Path(ids_path).write_text("".join(f"{p}\n" for p in m.point_ids))
    if features_path is not None and m.feature_ids is not None:
        Path(features_path).write_text("".join(f"{f}\n" for f in m.feature_ids))


def load_labels(path) -> GroundTruth:
    """Load ``point_id, label`` rows; label strings map to 1..k by first appearance."""
    rows = [r for r in _read_rows(path) if any(c for c in r)]
    if not rows:
        raise EmptyInput(f"{path} has no labels")
    for i, r in enumerate(rows):
        if len(r) < 2:
            raise ParseError("expected two fields", line=i + 1)
    first_token = rows[0][1]
    if first_token.lower() == "label" and all(r[1] != first_token for r in rows[1:]):
        rows = rows[1:]
    if not rows:
        raise EmptyInput(f"{path} has a header but no labels")
    index: dict[str, int] = {}
    labels: dict[str, int] = {}
    for pid, name, *_ in rows:
        if pid in labels:
            raise DuplicateId(pid)
        if name not in index:
            index[name] = len(index) + 1
        labels[pid] = index[name]
    return GroundTruth(labels, len(index), tuple(index))


def write_labels(path, point_ids, labels) -> None:
    """Write 2-column CSV ``point_id,label``."""
    with open(path, "w") as fh:
        for pid, lab in zip(point_ids, labels):
            fh.write(f"{pid},{lab}\n")


def normalize(m: DataMatrix, library_size: float | None = None, log1p: bool = False) -> DataMatrix:
    """Scale each column to ``library_size`` total, then optionally apply ``log1p``.

    All-zero columns cannot be scaled; they are left as-is, listed under
    ``metadata["zero_columns"]`` and reported with a ``RuntimeWarning``.
    """
    if library_size is not None and not (library_size > 0 and math.isfinite(library_size)):
        raise InvalidParameter(f"library_size must be positive, got {library_size}")
    values = m.values.copy()
    zero_cols: list[int] = []
    if library_size is not None:
        if sp.issparse(values):
            if values.nnz and values.data.min() < 0:
                raise InvalidInput("negative entries cannot be library-size normalized")
            sums = np.asarray(values.sum(axis=0)).ravel()
        else:
            if values.size and values.min() < 0:
                raise InvalidInput("negative entries cannot be library-size normalized")
            sums = values.sum(axis=0)
        zero = sums == 0
        scale = np.where(zero, 1.0, library_size / np.where(zero, 1.0, sums))
        if sp.issparse(values):
            values = sp.csc_matrix(values @ sp.diags(scale))
        else:
            values = values * scale[None, :]
        zero_cols = np.flatnonzero(zero).tolist()
        if zero_cols:
            warnings.warn(
                f"{len(zero_cols)} all-zero column(s) left unscaled", RuntimeWarning, stacklevel=2
            )
    if log1p:
        if sp.issparse(values):
            values = values.copy()
            values.data = np.log1p(values.data)
        else:
            values = np.log1p(values)
    meta = dict(m.metadata)
    meta["zero_columns"] = zero_cols
    return DataMatrix(values, m.point_ids, m.feature_ids, meta)


def as_label_array(truth, n: int, point_ids=None) -> np.ndarray:
    """Per-vertex integer labels (``<= 0`` = unlabeled) from an array or a :class:`GroundTruth`."""
    if isinstance(truth, GroundTruth):
        if point_ids is None:
            point_ids = [str(i) for i in range(n)]
        arr = truth.to_array(point_ids)
    else:
        arr = np.asarray(truth, dtype=np.int64)
    if arr.shape != (n,):
        raise DimensionMismatch(f"{arr.shape[0]} labels for {n} points")
    return arr
