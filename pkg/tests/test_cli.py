import json

from click.testing import CliRunner

from mdbench.cli import main
from mdbench.data import Dataset

from conftest import random_categorical_dataset

import numpy as np
import pytest


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def toy_table(tmp_path):
    rng = np.random.default_rng(0)
    ds = random_categorical_dataset(rng, n=90, k=4, n_cats=3, missing_rate=0.05)
    path = tmp_path / "toy.table"
    ds.save(path)
    return path


def test_inspect_table(runner, toy_table):
    res = runner.invoke(main, ["inspect", "--table", str(toy_table)])
    assert res.exit_code == 0, res.output
    doc = json.loads(res.output)
    assert doc["n"] == 90 and doc["n_features"] == 4
    assert "association" in doc


def test_inspect_output_file_and_no_association(runner, toy_table, tmp_path):
    out = tmp_path / "report.json"
    res = runner.invoke(
        main,
        ["inspect", "--table", str(toy_table), "--no-association", "-o", str(out)],
    )
    assert res.exit_code == 0
    doc = json.loads(out.read_text())
    assert "association" not in doc


def test_inspect_requires_exactly_one_input(runner, toy_table):
    res = runner.invoke(main, ["inspect"])
    assert res.exit_code == 1
    res = runner.invoke(
        main, ["inspect", "--table", str(toy_table), "--dataset", "adult"]
    )
    assert res.exit_code == 1


def test_inspect_bad_path_fails_cleanly(runner, tmp_path):
    res = runner.invoke(main, ["inspect", "--table", str(tmp_path / "nope.table")])
    assert res.exit_code == 1
    assert "error:" in res.output


def test_perturb_and_receipt(runner, toy_table, tmp_path):
    out = tmp_path / "perturbed.table"
    receipt = tmp_path / "receipt.json"
    res = runner.invoke(
        main,
        [
            "perturb", "--table", str(toy_table), "--delta", "0.3",
            "--seed", "7", "--out", str(out), "--receipt", str(receipt),
        ],
    )
    assert res.exit_code == 0, res.output
    ds = Dataset.load(out)
    rec = json.loads(receipt.read_text())
    assert rec["mechanism"] == "MCAR"
    assert rec["achieved_fraction"] == pytest.approx(0.3, abs=0.01)
    assert ds.mask.sum() == round(0.3 * 90 * 4)


def test_perturb_deterministic_bytes(runner, toy_table, tmp_path):
    a, b = tmp_path / "a.table", tmp_path / "b.table"
    for out in (a, b):
        res = runner.invoke(
            main,
            ["perturb", "--table", str(toy_table), "--delta", "0.2",
             "--seed", "5", "--out", str(out)],
        )
        assert res.exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_perturb_mnar_with_focus_token(runner, toy_table, tmp_path):
    out = tmp_path / "mnar.table"
    res = runner.invoke(
        main,
        ["perturb", "--table", str(toy_table), "--mechanism", "MNAR",
         "--delta", "0.2", "--focus-token", "c0", "--out", str(out)],
    )
    assert res.exit_code == 0, res.output
    assert Dataset.load(out).mask.sum() == round(0.2 * 90 * 4)


def test_perturb_rejects_bad_delta(runner, toy_table, tmp_path):
    res = runner.invoke(
        main,
        ["perturb", "--table", str(toy_table), "--delta", "0.01",
         "--out", str(tmp_path / "x.table")],
    )
    assert res.exit_code == 1
    assert "delta" in res.output


def test_impute_removes_all_missingness(runner, toy_table, tmp_path):
    out = tmp_path / "imputed.table"
    res = runner.invoke(
        main,
        ["impute", "--table", str(toy_table), "--method", "knn", "-k", "3",
         "--out", str(out)],
    )
    assert res.exit_code == 0, res.output
    ds = Dataset.load(out)
    assert not ds.mask.any()


def test_impute_rejects_unknown_method(runner, toy_table, tmp_path):
    res = runner.invoke(
        main,
        ["impute", "--table", str(toy_table), "--method", "psychic",
         "--out", str(tmp_path / "x.table")],
    )
    assert res.exit_code == 2  # click rejects the choice before we run


def test_train_single_model(runner, toy_table, tmp_path):
    model_path = tmp_path / "model.json"
    res = runner.invoke(
        main,
        ["train", "--table", str(toy_table), "--classifier", "decision_tree",
         "--max-depth", "4", "--save", str(model_path)],
    )
    assert res.exit_code == 0, res.output
    doc = json.loads(res.output.strip().splitlines()[-1])
    assert 0.0 <= doc["train_error"] <= 1.0
    assert 0.0 <= doc["test_error"] <= 1.0
    assert model_path.exists()


def _bench_config(tmp_path, table, **overrides):
    cfg = {
        "dataset": {"table": str(table)},
        "treatments": ["one_hot", {"method": "mode"}],
        "classifiers": [{"kind": "decision_tree", "max_depth": 4}],
        "deltas": [0.0, 0.2],
        "base_seed": 9,
        "timing": False,
        "output": str(tmp_path / "report.csv"),
    }
    cfg.update(overrides)
    path = tmp_path / "bench.json"
    path.write_text(json.dumps(cfg))
    return path, cfg


def test_bench_end_to_end_with_figures(runner, toy_table, tmp_path):
    cfg_path, cfg = _bench_config(tmp_path, toy_table, figures=True)
    res = runner.invoke(main, ["bench", "--config", str(cfg_path)])
    assert res.exit_code == 0, res.output
    report = (tmp_path / "report.csv").read_text()
    assert report.count("\n") == 5  # header + 4 cells
    figs = list(tmp_path.glob("errors_*.png"))
    assert len(figs) == 1


def test_bench_rerun_byte_identical(runner, toy_table, tmp_path):
    cfg_path, cfg = _bench_config(tmp_path, toy_table)
    assert runner.invoke(main, ["bench", "--config", str(cfg_path)]).exit_code == 0
    first = (tmp_path / "report.csv").read_bytes()
    assert runner.invoke(main, ["bench", "--config", str(cfg_path)]).exit_code == 0
    assert (tmp_path / "report.csv").read_bytes() == first


def test_bench_rejects_unknown_keys(runner, toy_table, tmp_path):
    cfg_path, _ = _bench_config(tmp_path, toy_table, typo_key=1)
    res = runner.invoke(main, ["bench", "--config", str(cfg_path)])
    assert res.exit_code == 1
    assert "typo_key" in res.output

    cfg_path, _ = _bench_config(
        tmp_path, toy_table, treatments=[{"method": "mode", "bogus": 1}]
    )
    res = runner.invoke(main, ["bench", "--config", str(cfg_path)])
    assert res.exit_code == 1
    assert "bogus" in res.output


def test_bench_rejects_unknown_method_and_classifier(runner, toy_table, tmp_path):
    cfg_path, _ = _bench_config(tmp_path, toy_table, treatments=["psychic"])
    res = runner.invoke(main, ["bench", "--config", str(cfg_path)])
    assert res.exit_code == 1
    assert "psychic" in res.output

    cfg_path, _ = _bench_config(tmp_path, toy_table, classifiers=["perceptron"])
    res = runner.invoke(main, ["bench", "--config", str(cfg_path)])
    assert res.exit_code == 1


def test_bench_exit_nonzero_when_cells_fail(runner, tmp_path):
    # high delta destroys every complete case: the knn cell fails, bench
    # still writes the successful cells but exits 1
    rng = np.random.default_rng(3)
    ds = random_categorical_dataset(rng, n=40, k=4, missing_rate=0.1)
    table = tmp_path / "t.table"
    ds.save(table)
    cfg_path, _ = _bench_config(
        tmp_path, table,
        treatments=[{"method": "mode"}, {"method": "knn", "k": 3}],
        deltas=[0.9],
    )
    res = runner.invoke(main, ["bench", "--config", str(cfg_path)])
    assert res.exit_code == 1
    assert "failed" in res.output
    assert (tmp_path / "report.csv").exists()


def test_report_subcommand_figures_and_convert(runner, toy_table, tmp_path):
    cfg_path, cfg = _bench_config(tmp_path, toy_table)
    assert runner.invoke(main, ["bench", "--config", str(cfg_path)]).exit_code == 0
    report = tmp_path / "report.csv"
    figdir = tmp_path / "figs"
    out_json = tmp_path / "report.json"
    res = runner.invoke(
        main,
        ["report", str(report), "--figures-dir", str(figdir),
         "--to", "json", "-o", str(out_json)],
    )
    assert res.exit_code == 0, res.output
    assert list(figdir.glob("*.png"))
    rows = json.loads(out_json.read_text())
    assert len(rows) == 4
    # converting back to csv reproduces the original bytes
    out_csv = tmp_path / "round.csv"
    res = runner.invoke(
        main,
        ["report", str(out_json), "--figures-dir", str(figdir),
         "--to", "csv", "-o", str(out_csv)],
    )
    assert res.exit_code == 0
    assert out_csv.read_bytes() == report.read_bytes()


def test_fetch_rejects_unknown_dataset(runner):
    res = runner.invoke(main, ["fetch", "nope"])
    assert res.exit_code == 2
