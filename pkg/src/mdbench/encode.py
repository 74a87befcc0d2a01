"""One-hot encoding with missing-as-category, plus train-statistic standardization.

Categorical features become indicator blocks over the full-dataset vocabulary,
with an extra MISSING column when the feature can be missing. Continuous
features are standardized with the TRAINING mean and standard deviation
(n-1 denominator); a missing continuous value becomes 0 in standardized space
with a separate 0/1 missingness indicator column. The same fitted model is
applied to train and test so widths always agree.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from mdbench.data import Dataset, DataError

__all__ = [
    "EncodingError",
    "EncoderModel",
    "EncodedMatrix",
    "fit_encoder",
    "encode",
    "decode_column_provenance",
    "export_encoded",
]

_STD_FLOOR = 1e-12


class EncodingError(DataError):
    """Schema mismatch or unencodable value."""


@dataclass(frozen=True)
class _CatEntry:
    col_start: int
    n_categories: int
    has_missing_col: bool

    @property
    def width(self) -> int:
        return self.n_categories + (1 if self.has_missing_col else 0)


@dataclass(frozen=True)
class _ContEntry:
    col_start: int
    mean: float
    std: float
    degenerate: bool  # std below floor; encoded as constant 0
    has_indicator: bool

    @property
    def width(self) -> int:
        return 2 if self.has_indicator else 1


@dataclass(frozen=True)
class EncoderModel:
    """Fitted encoding: per-feature column layout and train statistics."""

    schema: tuple
    entries: tuple
    width: int


def fit_encoder(train: Dataset, full_missing_flags=None) -> EncoderModel:
    """Fit column layout and continuous statistics on the training set.

    ``full_missing_flags`` is an optional per-feature boolean sequence marking
    features that are missing anywhere in the FULL dataset; a MISSING column
    (or continuous indicator) is allocated when either that flag is set or the
    training set itself has missing values in the feature, so train and test
    matrices always align.
    """
    if full_missing_flags is None:
        full_missing_flags = [False] * train.n_features
    if len(full_missing_flags) != train.n_features:
        raise EncodingError("full_missing_flags length does not match schema")
    entries = []
    col = 0
    mask = train.mask
    for j, f in enumerate(train.schema):
        can_miss = bool(full_missing_flags[j]) or bool(mask[:, j].any())
        if f.is_categorical:
            e = _CatEntry(col, len(f.categories), can_miss)
        else:
            vals = train.columns[j]
            obs = vals[~np.isnan(vals)]
            if len(obs) == 0:
                raise EncodingError(
                    f"continuous feature {f.name!r} has no observed training values"
                )
            mean = float(obs.mean())
            std = float(obs.std(ddof=1)) if len(obs) > 1 else 0.0
            degenerate = not math.isfinite(std) or std < _STD_FLOOR
            e = _ContEntry(col, mean, std, degenerate, can_miss)
        entries.append(e)
        col += e.width
    return EncoderModel(train.schema, tuple(entries), col)


@dataclass
class EncodedMatrix:
    """Dense encoded design matrix with labels and column provenance."""

    X: np.ndarray  # n x D float64
    y: np.ndarray  # int64 label codes
    label_names: tuple
    provenance: list  # one dict per column: feature, role, detail

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def width(self) -> int:
        return self.X.shape[1]


def encode(ds: Dataset, model: EncoderModel) -> EncodedMatrix:
    """Encode a dataset with a fitted model. Pure; schema must match."""
    if ds.schema != model.schema:
        raise EncodingError("dataset schema does not match the encoder model")
    n = ds.n
    X = np.zeros((n, model.width))
    for j, (f, e) in enumerate(zip(ds.schema, model.entries)):
        col = ds.columns[j]
        if f.is_categorical:
            miss = col == -1
            if miss.any() and not e.has_missing_col:
                raise EncodingError(
                    f"feature {f.name!r} has missing values but the encoder "
                    "allocated no MISSING column"
                )
            rows = np.flatnonzero(~miss)
            X[rows, e.col_start + col[rows]] = 1.0
            if e.has_missing_col:
                X[miss, e.col_start + e.n_categories] = 1.0
        else:
            miss = np.isnan(col)
            if miss.any() and not e.has_indicator:
                raise EncodingError(
                    f"continuous feature {f.name!r} has missing values but the "
                    "encoder allocated no indicator column"
                )
            if e.degenerate:
                z = np.zeros(n)
            else:
                z = (col - e.mean) / e.std
            z[miss] = 0.0  # constant fill in standardized space
            X[:, e.col_start] = z
            if e.has_indicator:
                X[:, e.col_start + 1] = miss.astype(np.float64)
    return EncodedMatrix(X, ds.labels.copy(), ds.label_names, decode_column_provenance(model))


def decode_column_provenance(model: EncoderModel) -> list[dict]:
    """One row per encoded column: source feature and meaning."""
    rows = []
    for f, e in zip(model.schema, model.entries):
        if isinstance(e, _CatEntry):
            for c in range(e.n_categories):
                rows.append({"feature": f.name, "role": "category", "detail": f.categories[c]})
            if e.has_missing_col:
                rows.append({"feature": f.name, "role": "missing", "detail": None})
        else:
            rows.append(
                {
                    "feature": f.name,
                    "role": "continuous",
                    "detail": {"mean": e.mean, "std": e.std, "degenerate": e.degenerate},
                }
            )
            if e.has_indicator:
                rows.append({"feature": f.name, "role": "indicator", "detail": None})
    assert len(rows) == model.width
    return rows


def export_encoded(em: EncodedMatrix, matrix_path, provenance_path) -> None:
    """Write the matrix as headerless numeric CSV plus a JSON provenance sidecar."""
    with open(matrix_path, "w", newline="") as fh:
        w = csv.writer(fh)
        for i in range(em.n):
            w.writerow([repr(v) for v in em.X[i]] + [int(em.y[i])])
    with open(provenance_path, "w") as fh:
        json.dump(
            {"label_names": list(em.label_names), "columns": em.provenance},
            fh,
            indent=2,
        )
