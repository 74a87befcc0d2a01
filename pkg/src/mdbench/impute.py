"""Imputation of missing values, fitted on training data only.

Four families:

* mode/mean replacement (training-set mode for categorical, mean for
  continuous; mode ties break to the earlier category in schema order)
* random replacement (each incomplete example copies its missing cells from
  one uniformly drawn complete training case)
* k-NN hot deck (donors are complete training cases; distance = categorical
  mismatch count + squared standardized continuous differences, over the
  features observed in the query; categorical fill is the donor mode,
  continuous fill the donor mean)
* prediction models (one independent per-feature predictor fitted on complete
  training cases; logistic regression, random forest, or linear SVM for
  categorical targets, least squares for continuous)

Every imputer's transform fills all missing cells, never touches observed
cells or labels, and is deterministic given the fit seed and row order.
Donor and neighbor pools always come from the TRAINING complete cases, also
when transforming test data.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from mdbench.data import (
    DataError,
    Dataset,
    NoCompleteCasesError,
    complete_cases,
)
from mdbench.seeding import substream

__all__ = [
    "ImputationError",
    "METHODS",
    "PREDICTOR_FAMILIES",
    "fit_imputer",
    "ModeImputer",
    "RandomReplacementImputer",
    "KnnImputer",
    "ModelImputer",
]

METHODS = ("mode", "random_replacement", "knn", "model")
PREDICTOR_FAMILIES = ("logistic", "random_forest", "linear_svm")

_STD_FLOOR = 1e-12


class ImputationError(DataError):
    """Unfittable imputer (empty donor pool, fully missing feature, ...)."""


def _train_modes_means(train: Dataset) -> tuple[list, list[str]]:
    """Per-feature fill values: mode code for categorical, mean for continuous."""
    fills = []
    notes = []
    for j, f in enumerate(train.schema):
        col = train.columns[j]
        if f.is_categorical:
            obs = col[col != -1]
            if len(obs) == 0:
                raise ImputationError(
                    f"feature {f.name!r} is 100% missing in the training set"
                )
            counts = np.bincount(obs, minlength=len(f.categories))
            fills.append(int(np.argmax(counts)))  # argmax ties -> lower code
        else:
            obs = col[~np.isnan(col)]
            if len(obs) == 0:
                raise ImputationError(
                    f"feature {f.name!r} is 100% missing in the training set"
                )
            fills.append(float(obs.mean()))
    return fills, notes


def _check_schema(model_schema, ds: Dataset):
    if ds.schema != model_schema:
        raise ImputationError("dataset schema does not match the fitted imputer")


class ModeImputer:
    """Training-set mode (categorical) / mean (continuous) replacement."""

    method = "mode"

    def __init__(self, train: Dataset, seed: int = 0):
        self.schema = train.schema
        self.seed = seed
        self.fills, self.notes = _train_modes_means(train)

    def transform(self, ds: Dataset) -> Dataset:
        _check_schema(self.schema, ds)
        new_cols = {}
        for j, f in enumerate(ds.schema):
            col = ds.columns[j]
            miss = (col == -1) if f.is_categorical else np.isnan(col)
            if not miss.any():
                continue
            col = col.copy()
            col[miss] = self.fills[j]
            new_cols[j] = col
        return ds.replace_columns(new_cols)


class RandomReplacementImputer:
    """Fill each incomplete example's missing cells from one random complete
    training case. Row i of the input uses substream(seed, "row", i)."""

    method = "random_replacement"

    def __init__(self, train: Dataset, seed: int = 0):
        self.schema = train.schema
        self.seed = seed
        self.donors = complete_cases(train)
        self.notes: list[str] = []

    def transform(self, ds: Dataset) -> Dataset:
        _check_schema(self.schema, ds)
        mask = ds.mask
        rows = np.flatnonzero(mask.any(axis=1))
        if len(rows) == 0:
            return ds
        n_donors = self.donors.n
        donor_of = {
            int(i): int(substream(self.seed, "row", int(i)).integers(n_donors))
            for i in rows
        }
        new_cols = {}
        for j, f in enumerate(ds.schema):
            miss_rows = rows[mask[rows, j]]
            if len(miss_rows) == 0:
                continue
            col = ds.columns[j].copy()
            donor_idx = np.array([donor_of[int(i)] for i in miss_rows])
            col[miss_rows] = self.donors.columns[j][donor_idx]
            new_cols[j] = col
        return ds.replace_columns(new_cols)


class KnnImputer:
    """k-NN hot deck over the training complete cases.

    Distance between a query and a donor is computed only over features
    observed in the query: +1 per categorical mismatch plus
    ((value difference) / training std)^2 per continuous feature. Distance
    ties break to the lower donor index; categorical vote ties take the value
    of the nearest donor holding a tied category. A query with every feature
    missing falls back to training modes/means.
    """

    method = "knn"

    def __init__(self, train: Dataset, k: int = 5, seed: int = 0):
        if k < 1:
            raise ImputationError("k must be >= 1")
        self.schema = train.schema
        self.seed = seed
        self.fills, self.notes = _train_modes_means(train)
        self.donors = complete_cases(train)
        self.k = k
        self.k_clamped = False
        if k > self.donors.n:
            self.k = self.donors.n
            self.k_clamped = True
            self.notes.append(
                f"k={k} exceeds donor pool size {self.donors.n}; clamped"
            )
            warnings.warn(self.notes[-1], stacklevel=2)
        self.stds = {}
        for j in train.continuous_indices:
            col = train.columns[j]
            obs = col[~np.isnan(col)]
            std = float(obs.std(ddof=1)) if len(obs) > 1 else 0.0
            self.stds[j] = std

    def _neighbor_order(self, ds: Dataset, rows: np.ndarray, observed: np.ndarray):
        """k nearest donor indices for each of ``rows``, observed-feature metric."""
        n_d = self.donors.n
        dist = np.zeros((len(rows), n_d))
        for j in np.flatnonzero(observed):
            f = ds.schema[j]
            dcol = self.donors.columns[j]
            q = ds.columns[j][rows]
            if f.is_categorical:
                dist += q[:, None] != dcol[None, :]
            else:
                std = self.stds[j]
                if std < _STD_FLOOR:
                    continue  # constant training feature carries no signal
                dist += ((q[:, None] - dcol[None, :]) / std) ** 2
        order = np.argsort(dist, axis=1, kind="stable")  # ties -> lower index
        return order[:, : self.k]

    def transform(self, ds: Dataset) -> Dataset:
        _check_schema(self.schema, ds)
        mask = ds.mask
        incomplete = np.flatnonzero(mask.any(axis=1))
        if len(incomplete) == 0:
            return ds
        new_cols = {j: col.copy() for j, col in enumerate(ds.columns)}

        # group queries by missing pattern so distances vectorize per group
        patterns: dict[bytes, list[int]] = {}
        for i in incomplete:
            patterns.setdefault(mask[i].tobytes(), []).append(int(i))
        for pat, row_list in patterns.items():
            rows = np.array(row_list)
            miss = np.frombuffer(pat, dtype=bool)
            observed = ~miss
            if not observed.any():
                for j, f in enumerate(ds.schema):
                    new_cols[j][rows] = self.fills[j]
                continue
            # chunk rows to bound the distance matrix size
            chunk = max(1, int(4_000_000 / max(1, self.donors.n)))
            for lo in range(0, len(rows), chunk):
                sub = rows[lo : lo + chunk]
                nbrs = self._neighbor_order(ds, sub, observed)
                for j in np.flatnonzero(miss):
                    f = ds.schema[j]
                    vals = self.donors.columns[j][nbrs]  # per-row donor values
                    if f.is_categorical:
                        fill = np.empty(len(sub), dtype=np.int64)
                        for r in range(len(sub)):
                            v = vals[r]
                            counts = np.bincount(v, minlength=len(f.categories))
                            top = counts.max()
                            tied = np.flatnonzero(counts == top)
                            if len(tied) == 1:
                                fill[r] = tied[0]
                            else:
                                # nearest donor whose value is among the tied
                                for code in v:
                                    if counts[code] == top:
                                        fill[r] = code
                                        break
                        new_cols[j][sub] = fill
                    else:
                        new_cols[j][sub] = vals.mean(axis=1)
        return ds.replace_columns(new_cols)


def _drop_feature(ds: Dataset, target: int, target_labels, target_names) -> Dataset:
    """Dataset over all features but ``target``, with the target as label."""
    schema = tuple(f for j, f in enumerate(ds.schema) if j != target)
    cols = [c for j, c in enumerate(ds.columns) if j != target]
    return Dataset(schema, cols, target_labels, target_names, ds.row_ids)


class ModelImputer:
    """One independent single-pass prediction model per feature with
    missingness, fitted on training complete cases. Predictor-side missing
    values are prefilled with training modes/means before encoding."""

    method = "model"

    def __init__(
        self,
        train: Dataset,
        predictor: str = "logistic",
        seed: int = 0,
        forest_trees: int = 50,
        epochs: int = 30,
    ):
        if predictor not in PREDICTOR_FAMILIES:
            raise ImputationError(
                f"unknown predictor {predictor!r}; choose from {PREDICTOR_FAMILIES}"
            )
        self.schema = train.schema
        self.predictor = predictor
        self.seed = seed
        self.fills, self.notes = _train_modes_means(train)
        self._prefiller = ModeImputer(train, seed)
        cc = complete_cases(train)  # raises NoCompleteCasesError when empty
        self.models: dict[int, tuple] = {}
        train_missing = train.mask.any(axis=0)
        if train.n_features < 2:
            self.notes.append("single-feature dataset; falling back to mode/mean")
            return
        from mdbench.classifiers import (
            ForestParams,
            MlpParams,
            SvmParams,
            TreeParams,
            train_linear_svm,
            train_logistic,
            train_random_forest,
        )
        from mdbench.encode import encode, fit_encoder

        for j in np.flatnonzero(train_missing):
            f = train.schema[j]
            if f.is_categorical:
                target = cc.columns[j]
                sub = _drop_feature(cc, j, target, f.categories)
                enc = fit_encoder(sub)
                X = encode(sub, enc).X
                uniq = np.unique(target)
                if len(uniq) < 2:
                    self.models[j] = ("constant", None, int(target[0]))
                    self.notes.append(
                        f"feature {f.name!r} constant on complete cases; "
                        "constant predictor"
                    )
                    continue
                n_classes = len(f.categories)
                if self.predictor == "logistic":
                    m = train_logistic(
                        X, target, n_classes,
                        MlpParams(epochs=epochs, seed=self._sub(j)),
                    )
                elif self.predictor == "random_forest":
                    m = train_random_forest(
                        X, target, n_classes,
                        ForestParams(n_trees=forest_trees, seed=self._sub(j)),
                    )
                else:
                    m = train_linear_svm(
                        X, target, n_classes,
                        SvmParams(epochs=epochs, seed=self._sub(j)),
                    )
                self.models[j] = ("classifier", enc, m)
            else:
                target = cc.columns[j]
                dummy = np.zeros(cc.n, dtype=np.int64)
                sub = _drop_feature(cc, j, dummy, ("_",))
                enc = fit_encoder(sub)
                X = encode(sub, enc).X
                A = np.column_stack([X, np.ones(len(X))])
                coef, *_ = np.linalg.lstsq(A, target, rcond=None)
                self.models[j] = ("linear", enc, coef)

    def _sub(self, j: int) -> int:
        from mdbench.seeding import substream_seed

        return substream_seed(self.seed, "feature", j)

    def transform(self, ds: Dataset) -> Dataset:
        _check_schema(self.schema, ds)
        mask = ds.mask
        if not mask.any():
            return ds
        from mdbench.encode import encode

        prefilled = self._prefiller.transform(ds)
        new_cols = {}
        for j in np.flatnonzero(mask.any(axis=0)):
            f = ds.schema[j]
            rows = np.flatnonzero(mask[:, j])
            col = ds.columns[j].copy()
            entry = self.models.get(j)
            if entry is None:
                col[rows] = self.fills[j]  # no model fitted (clean in train)
            else:
                kind, enc, payload = entry
                if kind == "constant":
                    col[rows] = payload
                else:
                    dummy = np.zeros(len(rows), dtype=np.int64)
                    sub = _drop_feature(
                        prefilled.take(rows), j, dummy,
                        ("_",) if kind == "linear" else f.categories,
                    )
                    X = encode(sub, enc).X
                    if kind == "linear":
                        col[rows] = X @ payload[:-1] + payload[-1]
                    else:
                        col[rows] = payload.predict(X)
            new_cols[j] = col
        return ds.replace_columns(new_cols)


def fit_imputer(
    method: str,
    train: Dataset,
    *,
    k: int = 5,
    predictor: str = "logistic",
    seed: int = 0,
    **kwargs,
):
    """Fit an imputer of the given method on a training set."""
    if method == "mode":
        return ModeImputer(train, seed)
    if method == "random_replacement":
        return RandomReplacementImputer(train, seed)
    if method == "knn":
        return KnnImputer(train, k=k, seed=seed)
    if method == "model":
        return ModelImputer(train, predictor=predictor, seed=seed, **kwargs)
    raise ImputationError(f"unknown imputation method {method!r}; choose from {METHODS}")
