import json

import numpy as np
import pytest

from mdbench.classifiers import (
    ForestParams,
    MlpParams,
    SvmParams,
    TreeParams,
    load_model,
    save_model,
    train_decision_tree,
    train_linear_svm,
    train_mlp,
    train_random_forest,
)


def _data(seed=0, n=100, d=4):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = (X[:, 0] + X[:, 1] > 0).astype(np.int64)
    return X, y


def _assert_same_predictions(a, b, X):
    assert np.array_equal(a.predict(X), b.predict(X))


def test_tree_round_trip(tmp_path):
    X, y = _data()
    model = train_decision_tree(X, y, 2, TreeParams(max_depth=5))
    path = tmp_path / "tree.json"
    save_model(model, path)
    back = load_model(path)
    assert back.params == model.params
    assert np.array_equal(back.threshold, model.threshold)  # bit-exact via hex
    _assert_same_predictions(model, back, _data(1)[0])


def test_forest_round_trip(tmp_path):
    X, y = _data()
    model = train_random_forest(X, y, 2, ForestParams(n_trees=5, seed=3))
    path = tmp_path / "forest.json"
    save_model(model, path)
    back = load_model(path)
    assert back.params == model.params
    assert len(back.trees) == 5
    _assert_same_predictions(model, back, _data(1)[0])


def test_mlp_round_trip_bit_exact(tmp_path):
    X, y = _data()
    model = train_mlp(X, y, 2, MlpParams(hidden_layers=(8,), dropout_rates=(0.25,), epochs=5, seed=1))
    path = tmp_path / "mlp.json"
    save_model(model, path)
    back = load_model(path)
    assert back.config == model.config
    for (Wa, ba), (Wb, bb) in zip(model.params, back.params):
        assert np.array_equal(Wa, Wb)
        assert np.array_equal(ba, bb)
    Xq = _data(1)[0]
    assert np.array_equal(model.decision_values(Xq), back.decision_values(Xq))


def test_svm_round_trip(tmp_path):
    X, y = _data()
    model = train_linear_svm(X, y, 2, SvmParams(epochs=5, seed=2))
    path = tmp_path / "svm.json"
    save_model(model, path)
    back = load_model(path)
    assert np.array_equal(back.W, model.W)
    assert np.array_equal(back.b, model.b)
    assert back.train_error == model.train_error


def test_rejects_foreign_documents(tmp_path):
    p = tmp_path / "junk.json"
    p.write_text(json.dumps({"format": "other", "version": 1}))
    with pytest.raises(ValueError):
        load_model(p)
    with pytest.raises(TypeError):
        save_model(object(), tmp_path / "x.json")
