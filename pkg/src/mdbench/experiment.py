"""Experiment grid execution: perturb, treat, train, evaluate.

One grid cell is (classifier, treatment, delta). Pipeline order is fixed:
split the full dataset, perturb the training half only, apply the treatment
(one-hot encoding directly, or imputation then encoding), standardize with
training statistics, train replicate models, evaluate on the untouched test
half. Prediction intervals are +-1 population standard deviation over the
replicate test errors; the central estimate is their mean.

Replicate recipes (R = 5):
  mlp            distinct seeds with epoch budgets {1.0, 0.8, 0.9, 1.1, 1.2}E
  decision_tree  max_depth in {4, 8, 16, unlimited, 32}
  random_forest  (n_trees, mtry) in {(50,sqrt), (100,sqrt), (200,sqrt),
                 (100,log2), (100,all)}
  logistic/svm   distinct seeds
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from mdbench.data import DataError, Dataset, split
from mdbench.encode import encode, fit_encoder
from mdbench.impute import METHODS, PREDICTOR_FAMILIES, fit_imputer
from mdbench.perturb import default_mnar_focus, perturb_mcar, perturb_mnar
from mdbench.seeding import substream, substream_seed
from mdbench.classifiers import (
    ForestParams,
    MlpParams,
    SvmParams,
    TreeParams,
    error_rate,
    train_decision_tree,
    train_linear_svm,
    train_logistic,
    train_mlp,
    train_random_forest,
)

__all__ = [
    "GridError",
    "Treatment",
    "ClassifierSpec",
    "ExperimentGrid",
    "RunResult",
    "run_cell",
    "run_grid",
]

CLASSIFIER_KINDS = ("decision_tree", "random_forest", "mlp", "logistic", "linear_svm")

MLP_EPOCH_SCALES = (1.0, 0.8, 0.9, 1.1, 1.2)
TREE_DEPTH_REPLICATES = (4, 8, 16, None, 32)
FOREST_REPLICATES = ((50, "sqrt"), (100, "sqrt"), (200, "sqrt"), (100, "log2"), (100, "all"))
N_REPLICATES = 5


class GridError(DataError):
    """Invalid experiment grid configuration."""


@dataclass(frozen=True)
class Treatment:
    kind: str  # "one_hot" | "impute"
    method: str | None = None
    k: int = 5
    predictor: str = "logistic"

    def __post_init__(self):
        if self.kind not in ("one_hot", "impute"):
            raise GridError(f"unknown treatment kind {self.kind!r}")
        if self.kind == "impute":
            if self.method not in METHODS:
                raise GridError(f"unknown imputation method {self.method!r}")
            if self.method == "model" and self.predictor not in PREDICTOR_FAMILIES:
                raise GridError(f"unknown predictor {self.predictor!r}")

    @property
    def label(self) -> str:
        if self.kind == "one_hot":
            return "one_hot"
        if self.method == "model":
            return f"model({self.predictor})"
        if self.method == "knn":
            return f"knn(k={self.k})"
        return self.method


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    mlp: MlpParams = field(default_factory=MlpParams)
    svm: SvmParams = field(default_factory=SvmParams)
    tree: TreeParams = field(default_factory=TreeParams)
    forest: ForestParams = field(default_factory=ForestParams)

    def __post_init__(self):
        if self.kind not in CLASSIFIER_KINDS:
            raise GridError(f"unknown classifier kind {self.kind!r}")


@dataclass(frozen=True)
class ExperimentGrid:
    dataset_id: str
    treatments: tuple
    classifiers: tuple
    deltas: tuple
    mechanism: str = "MCAR"
    base_seed: int = 0
    train_fraction: float = 2.0 / 3.0
    stratified: bool = False
    mnar_focus_token: str | None = None

    def __post_init__(self):
        if not self.treatments or not self.classifiers or not self.deltas:
            raise GridError("grid axes must be non-empty")
        if self.mechanism not in ("MCAR", "MNAR"):
            raise GridError(f"unknown mechanism {self.mechanism!r}")
        for d in self.deltas:
            if not (d == 0 or 0.05 <= d <= 0.95):
                raise GridError(f"delta {d} outside {{0}} u [0.05, 0.95]")

    def cells(self) -> list[tuple]:
        """(index, classifier, treatment, delta) in deterministic order."""
        out = []
        i = 0
        for clf in self.classifiers:
            for tr in self.treatments:
                for d in self.deltas:
                    out.append((i, clf, tr, d))
                    i += 1
        return out


@dataclass
class RunResult:
    dataset: str
    classifier: str
    treatment: str
    mechanism: str
    delta: float
    error: float
    stdev: float
    replicate_errors: list
    seconds: float
    cell_index: int


def _stratified_split(ds: Dataset, fraction: float, seed: int):
    rng = np.random.default_rng(seed)
    train_idx = []
    test_idx = []
    for c in range(len(ds.label_names)):
        rows = np.flatnonzero(ds.labels == c)
        perm = rng.permutation(len(rows))
        n_train = int(np.floor(fraction * len(rows) + 0.5))
        train_idx.append(rows[perm[:n_train]])
        test_idx.append(rows[perm[n_train:]])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    if len(train_idx) == 0 or len(test_idx) == 0:
        raise GridError("stratified split left an empty half")
    return ds.take(train_idx), ds.take(test_idx)


def _split(grid: ExperimentGrid, full: Dataset):
    seed = substream_seed(grid.base_seed, "split")
    if grid.stratified:
        return _stratified_split(full, grid.train_fraction, seed)
    return split(full, grid.train_fraction, seed)


def _treated_matrices(grid, full, train, test, treatment, delta, cell_seed):
    if delta > 0:
        pseed = substream_seed(cell_seed, "perturb")
        if grid.mechanism == "MCAR":
            train, _ = perturb_mcar(train, delta, pseed)
        else:
            focus = default_mnar_focus(train, grid.mnar_focus_token)
            train, _ = perturb_mnar(train, delta, pseed, focus)
    if treatment.kind == "one_hot":
        flags = full.mask.any(axis=0)
        enc = fit_encoder(train, flags)
        return encode(train, enc), encode(test, enc)
    imp = fit_imputer(
        treatment.method,
        train,
        k=treatment.k,
        predictor=treatment.predictor,
        seed=substream_seed(cell_seed, "impute"),
    )
    train_i = imp.transform(train)
    test_i = imp.transform(test)
    enc = fit_encoder(train_i)
    return encode(train_i, enc), encode(test_i, enc)


def _scaled_epochs(base: int, scale: float) -> int:
    return max(1, int(np.floor(base * scale + 0.5)))


def _replicate_errors(clf: ClassifierSpec, Xtr, Xte, cell_seed: int) -> list[float]:
    n_classes = len(Xtr.label_names)
    errs = []
    for r in range(N_REPLICATES):
        rseed = substream_seed(cell_seed, "replicate", r)
        if clf.kind == "mlp":
            p = replace(
                clf.mlp,
                epochs=_scaled_epochs(clf.mlp.epochs, MLP_EPOCH_SCALES[r]),
                seed=rseed,
            )
            model = train_mlp(Xtr.X, Xtr.y, n_classes, p)
        elif clf.kind == "logistic":
            model = train_logistic(Xtr.X, Xtr.y, n_classes, replace(clf.mlp, seed=rseed))
        elif clf.kind == "linear_svm":
            model = train_linear_svm(Xtr.X, Xtr.y, n_classes, replace(clf.svm, seed=rseed))
        elif clf.kind == "decision_tree":
            p = replace(clf.tree, max_depth=TREE_DEPTH_REPLICATES[r])
            model = train_decision_tree(Xtr.X, Xtr.y, n_classes, p)
        else:
            n_trees, mtry = FOREST_REPLICATES[r]
            p = replace(
                clf.forest, n_trees=n_trees, mtry_rule=mtry, seed=rseed, tree=clf.forest.tree
            )
            model = train_random_forest(Xtr.X, Xtr.y, n_classes, p)
        errs.append(error_rate(model.predict(Xte.X), Xte.y))
    return errs


def run_cell(
    grid: ExperimentGrid,
    full: Dataset,
    cell_index: int,
    clf: ClassifierSpec,
    treatment: Treatment,
    delta: float,
) -> RunResult:
    """Execute one grid cell end to end."""
    t0 = time.perf_counter()
    train, test = _split(grid, full)
    cell_seed = substream_seed(grid.base_seed, "cell", cell_index)
    Xtr, Xte = _treated_matrices(grid, full, train, test, treatment, delta, cell_seed)
    errs = _replicate_errors(clf, Xtr, Xte, cell_seed)
    arr = np.array(errs)
    return RunResult(
        dataset=grid.dataset_id,
        classifier=clf.kind,
        treatment=treatment.label,
        mechanism=grid.mechanism,
        delta=float(delta),
        error=float(arr.mean()),
        stdev=float(arr.std(ddof=0)),
        replicate_errors=errs,
        seconds=time.perf_counter() - t0,
        cell_index=cell_index,
    )


@dataclass
class CellFailure:
    cell_index: int
    classifier: str
    treatment: str
    delta: float
    message: str


def run_grid(grid: ExperimentGrid, full: Dataset, jobs: int = 1):
    """Run every cell once; returns (results, failures) ordered by cell index."""
    cells = grid.cells()

    def work(cell):
        i, clf, tr, d = cell
        try:
            return run_cell(grid, full, i, clf, tr, d)
        except Exception as e:  # noqa: BLE001 - cell isolation is the contract
            return CellFailure(i, clf.kind, tr.label, d, f"{type(e).__name__}: {e}")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            outcomes = list(ex.map(work, cells))
    else:
        outcomes = [work(c) for c in cells]
    results = [o for o in outcomes if isinstance(o, RunResult)]
    failures = [o for o in outcomes if isinstance(o, CellFailure)]
    return results, failures
