import numpy as np
import pytest

from mdbench.data import (
    CATEGORICAL,
    CONTINUOUS,
    DataError,
    Dataset,
    FeatureSchema,
    MISSING,
    NoCompleteCasesError,
    complete_cases,
    feature_association,
    load_uci,
    missing_pattern_summary,
    split,
)

from conftest import toy_dataset


# -- loading -----------------------------------------------------------------


def _write(path, text):
    path.write_text(text)
    return path


def test_load_uci_basic(tmp_path):
    p = _write(
        tmp_path / "a.csv",
        "red, 1.5, yes\n"
        "blue, ?, no\n"
        "?, 3.0, yes\n",
    )
    ds = load_uci(p, [CATEGORICAL, CONTINUOUS, CATEGORICAL], label_column=2)
    assert ds.n == 3
    assert ds.n_features == 2
    assert ds.schema[0].categories == ("red", "blue")
    assert ds.label_names == ("yes", "no")
    assert ds.cell(0, 0) == "red"
    assert ds.cell(1, 1) is MISSING
    assert ds.cell(2, 0) is MISSING
    assert ds.cell(2, 1) == 3.0
    assert ds.mask.tolist() == [[False, False], [False, True], [True, False]]


def test_load_uci_multifile_shared_schema_and_suffix(tmp_path):
    p1 = _write(tmp_path / "a.csv", "red, 1, pos.\n")
    p2 = _write(
        tmp_path / "b.csv",
        "| header comment line\n"
        "\n"
        "green, 2, neg.\n"
        "red, 3, pos.\n",
    )
    ds = load_uci(
        [p1, p2],
        [CATEGORICAL, CONTINUOUS, CATEGORICAL],
        label_column=2,
        strip_label_suffix=".",
    )
    assert ds.n == 3
    assert ds.schema[0].categories == ("red", "green")
    assert ds.label_names == ("pos", "neg")
    assert ds.labels.tolist() == [0, 1, 0]


def test_load_uci_rejects_bad_rows(tmp_path):
    p = _write(tmp_path / "a.csv", "red, 1\n")
    with pytest.raises(DataError):
        load_uci(p, [CATEGORICAL, CONTINUOUS, CATEGORICAL], label_column=2)
    p2 = _write(tmp_path / "b.csv", "red, notanumber, yes\n")
    with pytest.raises(DataError):
        load_uci(p2, [CATEGORICAL, CONTINUOUS, CATEGORICAL], label_column=2)
    with pytest.raises(DataError):
        load_uci(tmp_path / "missing.csv", [CATEGORICAL], label_column=0)


def test_dataset_validation():
    f = FeatureSchema("a", CATEGORICAL, ("x", "y"))
    with pytest.raises(DataError):
        Dataset([f], [np.array([0, 5])], np.array([0, 0]), ("L",))  # code range
    with pytest.raises(DataError):
        Dataset([f, f], [np.array([0]), np.array([0])], np.array([0]), ("L",))
    with pytest.raises(DataError):
        FeatureSchema("c", CONTINUOUS, ("x",))


def test_dataset_immutability_and_equality():
    ds = toy_dataset(
        [CATEGORICAL, CONTINUOUS],
        [["a", 1.0], ["b", None], [None, 3.0]],
        ["p", "q", "p"],
    )
    with pytest.raises(ValueError):
        ds.columns[0][0] = 1
    assert ds == ds.take([0, 1, 2])
    assert ds != ds.take([0, 2, 1])


# -- split and complete cases -------------------------------------------------


def test_split_round_half_up_sizes():
    ds = toy_dataset([CONTINUOUS], [[float(i)] for i in range(5)], list("ababa"))
    train, test = split(ds, 0.5, seed=3)  # 2.5 rounds half up to 3
    assert (train.n, test.n) == (3, 2)
    got = sorted(train.row_ids.tolist() + test.row_ids.tolist())
    assert got == [0, 1, 2, 3, 4]
    # indices inside each half come back sorted
    assert train.row_ids.tolist() == sorted(train.row_ids.tolist())


def test_split_deterministic_and_seed_sensitive():
    ds = toy_dataset([CONTINUOUS], [[float(i)] for i in range(30)], ["x"] * 30)
    a1, _ = split(ds, 2 / 3, seed=7)
    a2, _ = split(ds, 2 / 3, seed=7)
    b1, _ = split(ds, 2 / 3, seed=8)
    assert a1 == a2
    assert a1 != b1


def test_complete_cases():
    ds = toy_dataset(
        [CATEGORICAL, CONTINUOUS],
        [["a", 1.0], ["b", None], [None, 3.0], ["a", 4.0]],
        list("pqpq"),
    )
    cc = complete_cases(ds)
    assert cc.row_ids.tolist() == [0, 3]
    all_missing = toy_dataset([CATEGORICAL], [[None], [None]], ["p", "q"])
    with pytest.raises(NoCompleteCasesError):
        complete_cases(all_missing)


# -- serialization -------------------------------------------------------------


def test_save_load_round_trip(tmp_path):
    ds = toy_dataset(
        [CATEGORICAL, CONTINUOUS, CATEGORICAL],
        [
            ["a", 1.25, "x"],
            ["b", None, None],
            [None, -3.5e-7, "y"],
        ],
        ["p", "q", "p"],
    )
    path = tmp_path / "table.csv"
    ds.save(path)
    back = Dataset.load(path)
    assert back == ds
    with pytest.raises(DataError):
        Dataset.load(_write(tmp_path / "junk.csv", "a,b,c\n"))


# -- pattern summary -----------------------------------------------------------


def test_missing_pattern_summary_hand_example():
    ds = toy_dataset(
        [CATEGORICAL, CATEGORICAL],
        [["a", "x"], [None, None], ["b", None], ["a", "x"]],
        list("ppqq"),
    )
    rep = missing_pattern_summary(ds)
    assert rep.n == 4 and rep.n_features == 2
    assert rep.per_feature_missing_fraction == {"f0": 0.25, "f1": 0.5}
    assert rep.example_missing_histogram == [2, 1, 1]
    assert rep.example_missing_share == 0.5
    # rows missing in both features: row 1 only
    assert rep.co_missingness[0, 1] == pytest.approx(0.25)
    assert rep.overall_missing_fraction == pytest.approx(3 / 8)
    assert sum(rep.missing_share_by_feature.values()) == pytest.approx(1.0)
    assert rep.to_json().startswith("{")


# -- association oracles ---------------------------------------------------------


def test_cramers_v_duplicated_column_is_one():
    rng = np.random.default_rng(0)
    codes = rng.integers(0, 3, size=500)
    cats = ("a", "b", "c")
    schema = [FeatureSchema("u", CATEGORICAL, cats), FeatureSchema("v", CATEGORICAL, cats)]
    ds = Dataset(schema, [codes, codes.copy()], np.zeros(500, dtype=int), ("L",))
    am = feature_association(ds)
    assert am.values[0, 1] == pytest.approx(1.0)
    assert not am.degenerate[0, 1]


def test_cramers_v_independent_uniform_near_zero():
    # independent uniform features, n = 10000: V should be close to 0
    rng = np.random.default_rng(42)
    a = rng.integers(0, 4, size=10000)
    b = rng.integers(0, 4, size=10000)
    cats = ("a", "b", "c", "d")
    schema = [FeatureSchema("u", CATEGORICAL, cats), FeatureSchema("v", CATEGORICAL, cats)]
    ds = Dataset(schema, [a, b], np.zeros(10000, dtype=int), ("L",))
    am = feature_association(ds)
    assert am.values[0, 1] < 0.05


def test_association_mixed_pair_nan_and_degenerate_constant():
    ds = toy_dataset(
        [CATEGORICAL, CONTINUOUS, CATEGORICAL],
        [["a", 1.0, "k"], ["b", 2.0, "k"], ["a", 3.0, "k"]],
        list("pqp"),
    )
    am = feature_association(ds)
    assert np.isnan(am.values[0, 1])  # mixed kinds
    assert am.values[0, 2] == 0.0 and am.degenerate[0, 2]  # constant feature
    assert am.values[0, 0] == 1.0


def test_pearson_for_continuous_pair():
    rng = np.random.default_rng(1)
    x = rng.normal(size=400)
    ds = Dataset(
        [FeatureSchema("x", CONTINUOUS), FeatureSchema("y", CONTINUOUS)],
        [x, 2.0 * x + 0.01 * rng.normal(size=400)],
        np.zeros(400, dtype=int),
        ("L",),
    )
    am = feature_association(ds)
    assert am.values[0, 1] == pytest.approx(1.0, abs=0.01)


# -- real corpora ----------------------------------------------------------------


def test_adult_shape_and_split(adult):
    assert adult.n == 48842
    assert adult.n_features == 14
    assert len(adult.categorical_indices) == 8
    assert len(adult.continuous_indices) == 6
    assert set(adult.label_names) == {"<=50K", ">50K"}
    train, test = split(adult, 2 / 3, seed=0)
    assert (train.n, test.n) == (32561, 16281)


def test_cvrs_shape_and_split(cvrs):
    assert cvrs.n == 435
    assert cvrs.n_features == 16
    assert all(f.is_categorical for f in cvrs.schema)
    assert set(cvrs.label_names) == {"democrat", "republican"}
    assert all(set(f.categories) <= {"y", "n"} for f in cvrs.schema)
    train, test = split(cvrs, 2 / 3, seed=0)
    assert (train.n, test.n) == (290, 145)
