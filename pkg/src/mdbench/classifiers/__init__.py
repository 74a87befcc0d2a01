"""Native classifiers: CART trees, random forests, MLP/logistic/SVM, grid search."""

from mdbench.classifiers.base import TrainingDivergedError, error_rate
from mdbench.classifiers.tree import (
    TreeParams,
    ForestParams,
    DecisionTreeModel,
    RandomForestModel,
    train_decision_tree,
    train_random_forest,
    gini,
)
from mdbench.classifiers.nnet import (
    MlpParams,
    SvmParams,
    MlpModel,
    SvmModel,
    adadelta_step,
    train_mlp,
    train_logistic,
    train_linear_svm,
)
from mdbench.classifiers.search import GridSearchResult, grid_search
from mdbench.classifiers.model_io import save_model, load_model

__all__ = [
    "TrainingDivergedError",
    "error_rate",
    "TreeParams",
    "ForestParams",
    "DecisionTreeModel",
    "RandomForestModel",
    "train_decision_tree",
    "train_random_forest",
    "gini",
    "MlpParams",
    "SvmParams",
    "MlpModel",
    "SvmModel",
    "adadelta_step",
    "train_mlp",
    "train_logistic",
    "train_linear_svm",
    "GridSearchResult",
    "grid_search",
    "save_model",
    "load_model",
]
