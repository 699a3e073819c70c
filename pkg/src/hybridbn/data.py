"""Column-typed datasets: CSV ingestion, equal-frequency discretization, splitting.

A Dataset holds one numpy array per column. Discrete columns are stored as
dense integer codes 0..k-1 with an attached code-to-label map; continuous
columns are float64 and guaranteed finite after ingestion.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class VariableKind(Enum):
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"


class DataError(ValueError):
    """Malformed input data or schema mismatch."""


@dataclass(eq=False)
class Dataset:
    names: tuple[str, ...]
    kinds: tuple[VariableKind, ...]
    columns: dict[str, np.ndarray]
    labels: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.names) != len(self.kinds):
            raise DataError("names and kinds must have equal length")
        if set(self.names) != set(self.columns):
            raise DataError("column dict does not match names")
        lengths = {len(self.columns[n]) for n in self.names}
        if len(lengths) > 1:
            raise DataError(f"ragged columns: lengths {sorted(lengths)}")
        for name, kind in zip(self.names, self.kinds):
            col = self.columns[name]
            if kind is VariableKind.CONTINUOUS:
                col = np.asarray(col, dtype=np.float64)
                if col.size and not np.all(np.isfinite(col)):
                    raise DataError(f"non-finite values in continuous column {name!r}")
            else:
                col = np.asarray(col, dtype=np.int64)
                labels = self.labels.get(name)
                if labels is None:
                    raise DataError(f"discrete column {name!r} has no label map")
                if col.size and (col.min() < 0 or col.max() >= len(labels)):
                    raise DataError(f"codes out of range for column {name!r}")
            self.columns[name] = col

    @property
    def n_rows(self) -> int:
        if not self.names:
            return 0
        return len(self.columns[self.names[0]])

    def kind_of(self, name: str) -> VariableKind:
        try:
            return self.kinds[self.names.index(name)]
        except ValueError:
            raise DataError(f"unknown variable {name!r}") from None

    def is_discrete(self, name: str) -> bool:
        return self.kind_of(name) is VariableKind.DISCRETE

    def cardinality(self, name: str) -> int:
        if not self.is_discrete(name):
            raise DataError(f"{name!r} is not discrete")
        return len(self.labels[name])

    @property
    def discrete_names(self) -> tuple[str, ...]:
        return tuple(n for n, k in zip(self.names, self.kinds) if k is VariableKind.DISCRETE)

    @property
    def continuous_names(self) -> tuple[str, ...]:
        return tuple(n for n, k in zip(self.names, self.kinds) if k is VariableKind.CONTINUOUS)

    def column(self, name: str) -> np.ndarray:
        return self.columns[name]

    def decode(self, name: str) -> list[str]:
        """Map a discrete column's codes back to their original labels."""
        labels = self.labels[name]
        return [labels[c] for c in self.columns[name]]

    def matrix(self, names) -> np.ndarray:
        """Stack the given columns as a float (n, len(names)) matrix."""
        return np.column_stack([np.asarray(self.columns[n], dtype=np.float64) for n in names])

    def codes(self, names) -> np.ndarray:
        """Stack discrete columns as an int (n, len(names)) code matrix."""
        return np.column_stack([self.columns[n] for n in names]).astype(np.int64)

    def subset(self, rows: np.ndarray) -> "Dataset":
        cols = {n: self.columns[n][rows] for n in self.names}
        return Dataset(self.names, self.kinds, cols, dict(self.labels))


def make_dataset(names, kinds, raw_columns, labels=None) -> Dataset:
    """Build a Dataset from raw per-column sequences.

    Discrete columns given as label sequences are code-compressed with labels
    sorted lexicographically; integer sequences are taken as codes directly
    (labels then default to their string forms).
    """
    labels = dict(labels or {})
    columns = {}
    for name, kind in zip(names, kinds):
        raw = raw_columns[name]
        if kind is VariableKind.CONTINUOUS:
            columns[name] = np.asarray(raw, dtype=np.float64)
        else:
            arr = np.asarray(raw)
            if name in labels:
                columns[name] = arr.astype(np.int64)
            elif arr.dtype.kind in "iu":
                codes = arr.astype(np.int64)
                k = int(codes.max()) + 1 if codes.size else 0
                labels[name] = tuple(str(i) for i in range(k))
                columns[name] = codes
            else:
                strs = [str(v) for v in raw]
                uniq = sorted(set(strs))
                index = {v: i for i, v in enumerate(uniq)}
                labels[name] = tuple(uniq)
                columns[name] = np.array([index[v] for v in strs], dtype=np.int64)
    return Dataset(tuple(names), tuple(kinds), columns, labels)


def _parse_float(text: str):
    try:
        value = float(text)
    except ValueError:
        return None
    if not np.isfinite(value):
        return None
    return value


def load_schema(path) -> dict[str, VariableKind]:
    """Read a two-column (name, kind) CSV; a 'name,kind' header row is optional."""
    schema = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise DataError(f"schema row {i} must have two fields, got {len(row)}")
            name, kind = row[0].strip(), row[1].strip().lower()
            if i == 0 and (name.lower(), kind) == ("name", "kind"):
                continue
            if kind not in ("discrete", "continuous"):
                raise DataError(f"unknown kind {kind!r} for {name!r}")
            schema[name] = VariableKind(kind)
    if not schema:
        raise DataError("empty schema file")
    return schema


def load_csv(path, schema: dict[str, VariableKind] | None = None, na_token: str = "") -> Dataset:
    """Load a header-equipped CSV into a typed Dataset.

    Without a schema, a column is Continuous when every entry parses as a
    finite number, Discrete otherwise. Rows containing missing or (under an
    explicit schema) unparseable cells are dropped with their indices
    reported in a warning.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("empty CSV: header row required") from None
        header = [h.strip() for h in header]
        rows = []
        for i, row in enumerate(reader):
            if len(row) != len(header):
                raise DataError(f"row {i} has {len(row)} fields, expected {len(header)}")
            rows.append([c.strip() for c in row])

    if schema is not None:
        missing = [h for h in header if h not in schema]
        if missing:
            raise DataError(f"schema does not cover columns: {missing}")
        kinds = [schema[h] for h in header]
    else:
        kinds = []
        for j, name in enumerate(header):
            numeric = all(
                cell != na_token and _parse_float(cell) is not None
                for row in rows
                for cell in [row[j]]
            )
            kinds.append(VariableKind.CONTINUOUS if numeric and rows else VariableKind.DISCRETE)

    bad_rows = []
    kept = []
    for i, row in enumerate(rows):
        ok = True
        for j, kind in enumerate(kinds):
            cell = row[j]
            if cell == na_token:
                ok = False
                break
            if kind is VariableKind.CONTINUOUS and _parse_float(cell) is None:
                ok = False
                break
        if ok:
            kept.append(row)
        else:
            bad_rows.append(i)
    if bad_rows:
        shown = ", ".join(str(i) for i in bad_rows[:20])
        more = "" if len(bad_rows) <= 20 else f" (+{len(bad_rows) - 20} more)"
        warnings.warn(f"dropped {len(bad_rows)} rows with missing/unparseable cells: {shown}{more}")
    if not kept:
        raise DataError("no usable rows after ingestion")

    raw_columns = {}
    for j, name in enumerate(header):
        if kinds[j] is VariableKind.CONTINUOUS:
            raw_columns[name] = [float(r[j]) for r in kept]
        else:
            raw_columns[name] = [r[j] for r in kept]
    return make_dataset(header, kinds, raw_columns)


def read_partial_rows(path, names, kinds, labels, na_token: str = "") -> list[dict]:
    """Read a CSV with possible missing cells against a known schema.

    Returns one dict per row mapping variable name to a typed value, with
    None marking missing cells. Discrete values are label-decoded to codes.
    """
    name_set = list(names)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError("empty CSV: header row required") from None
        if set(header) != set(name_set):
            raise DataError(f"columns {header} do not match model schema {name_set}")
        kind_of = dict(zip(names, kinds))
        code_of = {n: {lab: i for i, lab in enumerate(labs)} for n, labs in labels.items()}
        out = []
        for i, row in enumerate(reader):
            if len(row) != len(header):
                raise DataError(f"row {i} has {len(row)} fields, expected {len(header)}")
            parsed = {}
            for name, cell in zip(header, row):
                cell = cell.strip()
                if cell == na_token:
                    parsed[name] = None
                elif kind_of[name] is VariableKind.CONTINUOUS:
                    value = _parse_float(cell)
                    if value is None:
                        raise DataError(f"row {i}: cannot parse {cell!r} for continuous {name!r}")
                    parsed[name] = value
                else:
                    if cell not in code_of[name]:
                        raise DataError(f"row {i}: unknown category {cell!r} for {name!r}")
                    parsed[name] = code_of[name][cell]
            out.append(parsed)
    return out


@dataclass(frozen=True)
class DiscretizationMap:
    """Equal-frequency binning of one continuous column.

    cut_points are strictly increasing interior boundaries; a value lands in
    bin b = #(cut points strictly below it). bin_means are the training-data
    means per bin, used to decode a bin back to a representative value.
    """
    column: str
    cut_points: tuple[float, ...]
    bin_means: tuple[float, ...]

    @property
    def n_bins(self) -> int:
        return len(self.cut_points) + 1

    @property
    def bin_labels(self) -> tuple[str, ...]:
        return tuple(f"bin{i}" for i in range(self.n_bins))

    def assign(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if not self.cut_points:
            return np.zeros(len(values), dtype=np.int64)
        return np.searchsorted(np.asarray(self.cut_points), values, side="left").astype(np.int64)


def _equal_frequency_cuts(values: np.ndarray, k: int) -> list[float]:
    ordered = np.sort(values)
    n = len(ordered)
    cuts = []
    for i in range(1, k):
        idx = -((-i * n) // k) - 1  # ceil(i*n/k) - 1
        cuts.append(float(ordered[idx]))
    merged = []
    for c in cuts:
        if not merged or c > merged[-1]:
            merged.append(c)
    # a boundary at (or above) the maximum would leave an empty top bin
    return [c for c in merged if c < ordered[-1]]


def equal_frequency_discretize(data: Dataset, k: int) -> tuple[Dataset, list[DiscretizationMap]]:
    """Bin every continuous column into k approximately equal-frequency bins.

    Cut points sit at the order statistics ceil(i*n/k)-1 for i=1..k-1; tied
    quantiles are merged, so heavily tied columns may yield fewer bins (a
    warning is emitted). Discrete columns pass through unchanged.
    """
    if k < 2:
        raise DataError(f"bin count must be >= 2, got {k}")
    maps = []
    columns = {}
    labels = {}
    for name, kind in zip(data.names, data.kinds):
        if kind is VariableKind.DISCRETE:
            columns[name] = data.columns[name]
            labels[name] = data.labels[name]
            continue
        values = data.columns[name]
        cuts = _equal_frequency_cuts(values, k)
        if len(cuts) < k - 1:
            warnings.warn(
                f"column {name!r}: ties reduce {k} requested bins to {len(cuts) + 1}"
            )
        codes = (
            np.searchsorted(np.asarray(cuts), values, side="left").astype(np.int64)
            if cuts
            else np.zeros(len(values), dtype=np.int64)
        )
        n_bins = len(cuts) + 1
        means = []
        for b in range(n_bins):
            mask = codes == b
            means.append(float(values[mask].mean()) if mask.any() else float(values.mean()))
        dmap = DiscretizationMap(name, tuple(cuts), tuple(means))
        maps.append(dmap)
        columns[name] = codes
        labels[name] = dmap.bin_labels
    kinds = tuple(VariableKind.DISCRETE for _ in data.names)
    return Dataset(data.names, kinds, columns, labels), maps


def apply_discretization(data: Dataset, maps: list[DiscretizationMap]) -> Dataset:
    """Re-apply fitted bin boundaries to (possibly new) data."""
    by_column = {m.column: m for m in maps}
    columns = {}
    labels = {}
    kinds = []
    for name, kind in zip(data.names, data.kinds):
        if kind is VariableKind.DISCRETE or name not in by_column:
            columns[name] = data.columns[name]
            labels[name] = data.labels.get(name, ())
            kinds.append(VariableKind.DISCRETE if kind is VariableKind.DISCRETE else kind)
            continue
        dmap = by_column[name]
        columns[name] = dmap.assign(data.columns[name])
        labels[name] = dmap.bin_labels
        kinds.append(VariableKind.DISCRETE)
    return Dataset(data.names, tuple(kinds), columns, labels)


def train_test_split(data: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Disjoint row partition with |test| = round(test_fraction * n_rows)."""
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n = data.n_rows
    if n < 10:
        raise DataError(f"need at least 10 rows to split, got {n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_test = int(round(test_fraction * n))
    test_rows = np.sort(perm[:n_test])
    train_rows = np.sort(perm[n_test:])
    return data.subset(train_rows), data.subset(test_rows)
