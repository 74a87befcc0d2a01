"""Mixed-type tabular datasets with explicit missingness.

A :class:`Dataset` stores categorical features as integer codes into a
per-feature vocabulary (-1 for missing) and continuous features as float64
(NaN for missing). The missing mask is always derived from the values, so the
two can never disagree. Datasets are immutable after construction: every
transformation returns a fresh object.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MISSING",
    "DataError",
    "NoCompleteCasesError",
    "FeatureSchema",
    "Dataset",
    "PatternReport",
    "AssociationMatrix",
    "load_uci",
    "split",
    "complete_cases",
    "missing_pattern_summary",
    "feature_association",
]

CATEGORICAL = "categorical"
CONTINUOUS = "continuous"


class _MissingType:
    """Singleton sentinel for a missing cell value."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "MISSING"

    def __bool__(self):
        return False


MISSING = _MissingType()


class DataError(ValueError):
    """Malformed input data or an operation violating a dataset contract."""


class NoCompleteCasesError(DataError):
    """Raised when an operation needs complete cases and none exist."""


@dataclass(frozen=True)
class FeatureSchema:
    """Name, kind and (for categorical features) vocabulary of one feature."""

    name: str
    kind: str
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, CONTINUOUS):
            raise DataError(f"unknown feature kind {self.kind!r}")
        if self.kind == CONTINUOUS and self.categories:
            raise DataError(f"continuous feature {self.name!r} cannot have categories")
        if len(set(self.categories)) != len(self.categories):
            raise DataError(f"duplicate category tokens in feature {self.name!r}")

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL


class Dataset:
    """Immutable n-by-K mixed-type table with labels and a derived missing mask.

    Parameters
    ----------
    schema : sequence of FeatureSchema
    columns : list of 1-d arrays, one per feature
        int64 codes (-1 = missing) for categorical, float64 (NaN = missing)
        for continuous.
    labels : int64 array of codes into ``label_names``
    label_names : tuple of class tokens
    row_ids : optional int64 array of provenance row indices
    """

    __slots__ = ("schema", "columns", "labels", "label_names", "row_ids", "_mask")

    def __init__(self, schema, columns, labels, label_names, row_ids=None):
        schema = tuple(schema)
        if len(schema) == 0:
            raise DataError("dataset needs at least one feature")
        names = [f.name for f in schema]
        if len(set(names)) != len(names):
            raise DataError("duplicate feature names")
        if len(columns) != len(schema):
            raise DataError("column count does not match schema")
        labels = np.asarray(labels, dtype=np.int64)
        n = labels.shape[0]
        if n == 0:
            raise DataError("dataset needs at least one example")
        cols = []
        for f, col in zip(schema, columns):
            if f.is_categorical:
                col = np.asarray(col, dtype=np.int64)
                if col.size and (col.max(initial=-1) >= len(f.categories)):
                    raise DataError(f"code out of range for feature {f.name!r}")
            else:
                col = np.asarray(col, dtype=np.float64)
            if col.shape != (n,):
                raise DataError(f"column {f.name!r} has wrong length")
            col.setflags(write=False)
            cols.append(col)
        if labels.min(initial=0) < 0 or labels.max(initial=0) >= len(label_names):
            raise DataError("label code out of range")
        labels.setflags(write=False)
        if row_ids is None:
            row_ids = np.arange(n, dtype=np.int64)
        else:
            row_ids = np.asarray(row_ids, dtype=np.int64)
            if row_ids.shape != (n,):
                raise DataError("row_ids has wrong length")
        row_ids.setflags(write=False)
        self.schema = schema
        self.columns = cols
        self.labels = labels
        self.label_names = tuple(label_names)
        self.row_ids = row_ids
        self._mask = None

    # -- basic shape -----------------------------------------------------

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def n_features(self) -> int:
        return len(self.schema)

    @property
    def categorical_indices(self) -> list[int]:
        return [j for j, f in enumerate(self.schema) if f.is_categorical]

    @property
    def continuous_indices(self) -> list[int]:
        return [j for j, f in enumerate(self.schema) if not f.is_categorical]

    @property
    def mask(self) -> np.ndarray:
        """n-by-K boolean mask, True where the cell is missing."""
        if self._mask is None:
            cols = []
            for f, col in zip(self.schema, self.columns):
                cols.append(col == -1 if f.is_categorical else np.isnan(col))
            m = np.column_stack(cols)
            m.setflags(write=False)
            self._mask = m
        return self._mask

    def cell(self, i: int, j: int):
        """Cell value: category token, float, or MISSING."""
        f = self.schema[j]
        v = self.columns[j][i]
        if f.is_categorical:
            return MISSING if v == -1 else f.categories[v]
        return MISSING if math.isnan(v) else float(v)

    def label(self, i: int) -> str:
        return self.label_names[self.labels[i]]

    def replace_columns(self, new_columns: dict[int, np.ndarray]) -> "Dataset":
        """Fresh dataset with the given feature columns swapped out."""
        cols = [new_columns.get(j, col) for j, col in enumerate(self.columns)]
        return Dataset(self.schema, cols, self.labels, self.label_names, self.row_ids)

    def take(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.schema,
            [col[indices] for col in self.columns],
            self.labels[indices],
            self.label_names,
            self.row_ids[indices],
        )

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        if self.schema != other.schema or self.label_names != other.label_names:
            return False
        if not np.array_equal(self.labels, other.labels):
            return False
        if not np.array_equal(self.row_ids, other.row_ids):
            return False
        return all(
            np.array_equal(a, b, equal_nan=True)
            for a, b in zip(self.columns, other.columns)
        )

    def __repr__(self):
        return f"Dataset(n={self.n}, K={self.n_features}, classes={self.label_names})"

    # -- serialization ---------------------------------------------------

    FORMAT_VERSION = 1

    def save(self, path, missing_symbol: str = "?") -> None:
        """Write a self-describing columnar text file (schema header + CSV rows)."""
        header = {
            "format": "mdbench-table",
            "version": self.FORMAT_VERSION,
            "missing_symbol": missing_symbol,
            "features": [
                {"name": f.name, "kind": f.kind, "categories": list(f.categories)}
                for f in self.schema
            ],
            "label_names": list(self.label_names),
            "row_ids": self.row_ids.tolist(),
        }
        with open(path, "w", newline="") as fh:
            fh.write("#mdbench-table " + json.dumps(header) + "\n")
            w = csv.writer(fh)
            for i in range(self.n):
                row = []
                for f, col in zip(self.schema, self.columns):
                    v = col[i]
                    if f.is_categorical:
                        row.append(missing_symbol if v == -1 else f.categories[v])
                    else:
                        row.append(missing_symbol if math.isnan(v) else repr(float(v)))
                row.append(self.label_names[self.labels[i]])
                w.writerow(row)

    @classmethod
    def load(cls, path) -> "Dataset":
        """Load a file produced by :meth:`save`."""
        with open(path, newline="") as fh:
            first = fh.readline()
            if not first.startswith("#mdbench-table "):
                raise DataError(f"{path}: not an mdbench table file")
            header = json.loads(first[len("#mdbench-table "):])
            schema = tuple(
                FeatureSchema(f["name"], f["kind"], tuple(f["categories"]))
                for f in header["features"]
            )
            missing_symbol = header["missing_symbol"]
            label_names = tuple(header["label_names"])
            label_index = {t: c for c, t in enumerate(label_names)}
            cat_index = [
                {t: c for c, t in enumerate(f.categories)} if f.is_categorical else None
                for f in schema
            ]
            cols = [[] for _ in schema]
            labels = []
            for rownum, row in enumerate(csv.reader(fh), start=2):
                if len(row) != len(schema) + 1:
                    raise DataError(f"{path}:{rownum}: expected {len(schema) + 1} columns")
                for j, f in enumerate(schema):
                    tok = row[j]
                    if tok == missing_symbol:
                        cols[j].append(-1 if f.is_categorical else math.nan)
                    elif f.is_categorical:
                        cols[j].append(cat_index[j][tok])
                    else:
                        cols[j].append(float(tok))
                labels.append(label_index[row[-1]])
        return cls(schema, cols, labels, label_names, np.asarray(header["row_ids"]))


# -- ingestion -------------------------------------------------------------


def load_uci(
    paths,
    schema_hint,
    label_column: int,
    missing_symbol: str = "?",
    feature_names=None,
    strip_label_suffix: str | None = None,
) -> Dataset:
    """Load one or more UCI-style comma-separated files into a Dataset.

    ``paths`` may be a single path or a sequence; multiple files are
    concatenated before vocabularies are collected, so all parts share one
    schema. ``schema_hint`` gives the kind ("categorical"/"continuous") of
    every column including the label column. Tokens are whitespace-trimmed;
    blank lines and lines starting with '|' (UCI comment headers) are skipped.
    """
    if isinstance(paths, (str, bytes)) or hasattr(paths, "__fspath__"):
        paths = [paths]
    n_cols = len(schema_hint)
    if not 0 <= label_column < n_cols:
        raise DataError(f"label_column {label_column} out of range for {n_cols} columns")
    feat_cols = [j for j in range(n_cols) if j != label_column]
    if feature_names is None:
        feature_names = [f"f{j}" for j in feat_cols]
    if len(feature_names) != len(feat_cols):
        raise DataError("feature_names length does not match feature count")

    raw_cols = [[] for _ in feat_cols]
    raw_labels = []
    for path in paths:
        try:
            fh = open(path, newline="")
        except OSError as e:
            raise DataError(f"cannot read {path}: {e}") from e
        with fh:
            for rownum, row in enumerate(csv.reader(fh), start=1):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if row[0].lstrip().startswith("|"):
                    continue
                if len(row) != n_cols:
                    raise DataError(
                        f"{path}:{rownum}: expected {n_cols} columns, got {len(row)}"
                    )
                toks = [t.strip() for t in row]
                lab = toks[label_column]
                if strip_label_suffix and lab.endswith(strip_label_suffix):
                    lab = lab[: -len(strip_label_suffix)]
                if lab == missing_symbol:
                    raise DataError(f"{path}:{rownum}: label is the missing symbol")
                raw_labels.append(lab)
                for k, j in enumerate(feat_cols):
                    raw_cols[k].append(toks[j])

    if not raw_labels:
        raise DataError("no data rows found")

    schema = []
    columns = []
    for k, j in enumerate(feat_cols):
        kind = schema_hint[j]
        name = feature_names[k]
        toks = raw_cols[k]
        if kind == CATEGORICAL:
            vocab: dict[str, int] = {}
            codes = np.empty(len(toks), dtype=np.int64)
            for i, t in enumerate(toks):
                if t == missing_symbol:
                    codes[i] = -1
                else:
                    codes[i] = vocab.setdefault(t, len(vocab))
            schema.append(FeatureSchema(name, CATEGORICAL, tuple(vocab)))
            columns.append(codes)
        elif kind == CONTINUOUS:
            vals = np.empty(len(toks), dtype=np.float64)
            for i, t in enumerate(toks):
                if t == missing_symbol:
                    vals[i] = math.nan
                else:
                    try:
                        vals[i] = float(t)
                    except ValueError:
                        raise DataError(
                            f"row {i + 1}: continuous column {name!r} has "
                            f"non-numeric value {t!r}"
                        ) from None
            schema.append(FeatureSchema(name, CONTINUOUS))
            columns.append(vals)
        else:
            raise DataError(f"schema_hint[{j}]: unknown kind {kind!r}")

    label_vocab: dict[str, int] = {}
    labels = np.array([label_vocab.setdefault(t, len(label_vocab)) for t in raw_labels])
    return Dataset(schema, columns, labels, tuple(label_vocab))


# -- splitting and filtering ------------------------------------------------


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split(ds: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Uniform random row partition; train size = round-half-up(fraction * n)."""
    if not 0.0 < train_fraction < 1.0:
        raise DataError("train_fraction must be in (0, 1)")
    n_train = _round_half_up(train_fraction * ds.n)
    if n_train == 0 or n_train == ds.n:
        raise DataError("split would leave an empty train or test set")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(ds.n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    return ds.take(train_idx), ds.take(test_idx)


def complete_cases(ds: Dataset) -> Dataset:
    """Rows with no missing cell, in original order, provenance in row_ids."""
    keep = ~ds.mask.any(axis=1)
    if not keep.any():
        raise NoCompleteCasesError("dataset has no complete cases")
    return ds.take(np.flatnonzero(keep))


# -- pattern and association analysis ----------------------------------------


@dataclass
class AssociationMatrix:
    """Pairwise feature association: Cramér's V / Pearson r, NaN for mixed pairs."""

    feature_names: list[str]
    values: np.ndarray
    degenerate: np.ndarray  # boolean, True where a constant feature forced 0

    def to_dict(self) -> dict:
        return {
            "feature_names": self.feature_names,
            "values": [[None if math.isnan(v) else v for v in row] for row in self.values],
            "degenerate": self.degenerate.tolist(),
        }


@dataclass
class PatternReport:
    """Missingness pattern summary of a dataset."""

    n: int
    n_features: int
    feature_names: list[str]
    per_feature_missing_fraction: dict[str, float]
    example_missing_histogram: list[int]  # index = number of missing cells in a row
    example_missing_share: float  # share of rows with >= 1 missing cell
    co_missingness: np.ndarray  # K x K, share of rows missing in both features
    missing_share_by_feature: dict[str, float]  # feature's share of all missing cells
    overall_missing_fraction: float
    association: AssociationMatrix | None = None

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "n_features": self.n_features,
            "feature_names": self.feature_names,
            "per_feature_missing_fraction": self.per_feature_missing_fraction,
            "example_missing_histogram": self.example_missing_histogram,
            "example_missing_share": self.example_missing_share,
            "co_missingness": self.co_missingness.tolist(),
            "missing_share_by_feature": self.missing_share_by_feature,
            "overall_missing_fraction": self.overall_missing_fraction,
        }
        if self.association is not None:
            d["association"] = self.association.to_dict()
        return d

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def missing_pattern_summary(ds: Dataset, with_association: bool = True) -> PatternReport:
    """Summarize missingness patterns; fractions are computed on ``ds`` as given."""
    m = ds.mask
    n, k = m.shape
    names = [f.name for f in ds.schema]
    per_feature = m.mean(axis=0)
    row_counts = m.sum(axis=1)
    hist = np.bincount(row_counts, minlength=k + 1)[: k + 1]
    total_missing = int(m.sum())
    if total_missing:
        share_by_feature = m.sum(axis=0) / total_missing
    else:
        share_by_feature = np.zeros(k)
    co = (m.astype(np.float64).T @ m.astype(np.float64)) / n
    return PatternReport(
        n=n,
        n_features=k,
        feature_names=names,
        per_feature_missing_fraction={nm: float(v) for nm, v in zip(names, per_feature)},
        example_missing_histogram=hist.tolist(),
        example_missing_share=float((row_counts > 0).mean()),
        co_missingness=co,
        missing_share_by_feature={nm: float(v) for nm, v in zip(names, share_by_feature)},
        overall_missing_fraction=total_missing / (n * k),
        association=feature_association(ds) if with_association and k >= 2 else None,
    )


def _cramers_v(a: np.ndarray, b: np.ndarray) -> tuple[float, bool]:
    """Cramér's V of two code vectors (no missing entries). Returns (v, degenerate)."""
    ua, ia = np.unique(a, return_inverse=True)
    ub, ib = np.unique(b, return_inverse=True)
    r, c = len(ua), len(ub)
    if r < 2 or c < 2:
        return 0.0, True
    m = len(a)
    table = np.zeros((r, c))
    np.add.at(table, (ia, ib), 1.0)
    rows = table.sum(axis=1, keepdims=True)
    cols = table.sum(axis=0, keepdims=True)
    expected = rows * cols / m
    chi2 = float(((table - expected) ** 2 / expected).sum())
    v = math.sqrt(chi2 / (m * (min(r, c) - 1)))
    return min(v, 1.0), False


def feature_association(ds: Dataset) -> AssociationMatrix:
    """Pairwise association over pairwise-complete cells.

    Cramér's V for categorical pairs, Pearson r for continuous pairs, NaN for
    mixed pairs. Diagonal is 1. A feature constant on the pairwise-complete
    cells yields 0 with the degenerate flag set.
    """
    if ds.n_features < 2:
        raise DataError("feature_association needs at least 2 features")
    k = ds.n_features
    out = np.full((k, k), np.nan)
    degen = np.zeros((k, k), dtype=bool)
    np.fill_diagonal(out, 1.0)
    mask = ds.mask
    for j1 in range(k):
        for j2 in range(j1 + 1, k):
            f1, f2 = ds.schema[j1], ds.schema[j2]
            if f1.kind != f2.kind:
                continue
            ok = ~(mask[:, j1] | mask[:, j2])
            a = ds.columns[j1][ok]
            b = ds.columns[j2][ok]
            if len(a) == 0:
                v, d = 0.0, True
            elif f1.is_categorical:
                v, d = _cramers_v(a, b)
            else:
                sa, sb = a.std(), b.std()
                if sa < 1e-12 or sb < 1e-12:
                    v, d = 0.0, True
                else:
                    v, d = float(np.corrcoef(a, b)[0, 1]), False
            out[j1, j2] = out[j2, j1] = v
            degen[j1, j2] = degen[j2, j1] = d
    return AssociationMatrix([f.name for f in ds.schema], out, degen)
