"""Versioned JSON save/load for trained models.

Floats are stored as C99 hex literals (float.hex) so round-trips are
bit-exact; integer arrays are stored as plain lists.
"""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from mdbench.classifiers.nnet import MlpModel, MlpParams, SvmModel, SvmParams
from mdbench.classifiers.tree import (
    DecisionTreeModel,
    ForestParams,
    RandomForestModel,
    TreeParams,
)

__all__ = ["save_model", "load_model"]

FORMAT = "mdbench-model"
VERSION = 1


def _floats_out(arr) -> list:
    a = np.asarray(arr, dtype=np.float64)
    return [[v.hex() for v in row] for row in a] if a.ndim == 2 else [v.hex() for v in a]


def _floats_in(data) -> np.ndarray:
    if data and isinstance(data[0], list):
        return np.array([[float.fromhex(v) for v in row] for row in data])
    return np.array([float.fromhex(v) for v in data])


def _tree_out(t: DecisionTreeModel) -> dict:
    return {
        "feature": t.feature.tolist(),
        "threshold": _floats_out(t.threshold),
        "left": t.left.tolist(),
        "right": t.right.tolist(),
        "leaf_class": t.leaf_class.tolist(),
    }


def _tree_in(d: dict, n_classes: int, params: TreeParams) -> DecisionTreeModel:
    return DecisionTreeModel(
        np.array(d["feature"], dtype=np.int64),
        _floats_in(d["threshold"]),
        np.array(d["left"], dtype=np.int64),
        np.array(d["right"], dtype=np.int64),
        np.array(d["leaf_class"], dtype=np.int64),
        n_classes,
        params,
    )


def save_model(model, path) -> None:
    if isinstance(model, DecisionTreeModel):
        doc = {
            "kind": "decision_tree",
            "n_classes": model.n_classes,
            "params": asdict(model.params),
            "tree": _tree_out(model),
        }
    elif isinstance(model, RandomForestModel):
        p = asdict(model.params)
        doc = {
            "kind": "random_forest",
            "n_classes": model.n_classes,
            "params": p,
            "trees": [_tree_out(t) for t in model.trees],
        }
    elif isinstance(model, MlpModel):
        doc = {
            "kind": "mlp",
            "n_classes": model.n_classes,
            "params": asdict(model.config),
            "train_error": model.train_error,
            "epochs_run": model.epochs_run,
            "layers": [[_floats_out(W), _floats_out(b)] for W, b in model.params],
        }
    elif isinstance(model, SvmModel):
        doc = {
            "kind": "linear_svm",
            "n_classes": model.n_classes,
            "params": asdict(model.config),
            "train_error": model.train_error,
            "W": _floats_out(model.W),
            "b": _floats_out(model.b),
        }
    else:
        raise TypeError(f"cannot serialize model of type {type(model).__name__}")
    doc = {"format": FORMAT, "version": VERSION, **doc}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_model(path):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT or doc.get("version") != VERSION:
        raise ValueError(f"{path}: not a {FORMAT} v{VERSION} document")
    kind = doc["kind"]
    if kind == "decision_tree":
        params = TreeParams(**doc["params"])
        return _tree_in(doc["tree"], doc["n_classes"], params)
    if kind == "random_forest":
        p = dict(doc["params"])
        p["tree"] = TreeParams(**p["tree"])
        params = ForestParams(**p)
        trees = [_tree_in(t, doc["n_classes"], params.tree) for t in doc["trees"]]
        return RandomForestModel(trees, doc["n_classes"], params)
    if kind == "mlp":
        p = dict(doc["params"])
        for key in ("hidden_layers", "dropout_rates", "momentum"):
            p[key] = tuple(p[key])
        model = MlpModel(
            [[_floats_in(W), _floats_in(b)] for W, b in doc["layers"]],
            doc["n_classes"],
            MlpParams(**p),
            train_error=doc["train_error"],
            epochs_run=doc["epochs_run"],
        )
        return model
    if kind == "linear_svm":
        return SvmModel(
            _floats_in(doc["W"]),
            _floats_in(doc["b"]),
            doc["n_classes"],
            SvmParams(**doc["params"]),
            train_error=doc["train_error"],
        )
    raise ValueError(f"{path}: unknown model kind {kind!r}")
