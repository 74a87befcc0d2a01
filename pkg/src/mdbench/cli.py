"""Command-line interface.

Subcommands: fetch, inspect, perturb, impute, train, bench, report.
Data goes to stdout or files; diagnostics go to stderr. Every subcommand is
deterministic given its flags and seed.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from mdbench import datasets as dsreg
from mdbench.data import DataError, Dataset, load_uci, missing_pattern_summary, split
from mdbench.encode import encode, fit_encoder
from mdbench.experiment import (
    ClassifierSpec,
    ExperimentGrid,
    GridError,
    Treatment,
    run_grid,
)
from mdbench.impute import METHODS, PREDICTOR_FAMILIES, fit_imputer
from mdbench.perturb import default_mnar_focus, perturb_mcar, perturb_mnar
from mdbench.report import emit_report, parse_report, report_rows
from mdbench.seeding import substream_seed
from mdbench.classifiers import (
    ForestParams,
    MlpParams,
    SvmParams,
    TreeParams,
    error_rate,
    save_model,
    train_decision_tree,
    train_linear_svm,
    train_logistic,
    train_mlp,
    train_random_forest,
)

DEFAULT_SEED = 20240101


def _fail(msg: str) -> None:
    click.echo(f"error: {msg}", err=True)
    sys.exit(1)


def _load_input(dataset: str | None, table: str | None, data_dir: str | None) -> Dataset:
    if (dataset is None) == (table is None):
        _fail("give exactly one of --dataset or --table")
    try:
        if dataset is not None:
            return dsreg.load_dataset(dataset, data_dir)
        return Dataset.load(table)
    except (DataError, OSError) as e:
        _fail(str(e))


@click.group()
def main():
    """Missing-data perturbation / imputation benchmark toolkit."""


@main.command()
@click.argument("name", type=click.Choice(sorted(dsreg.DATASETS)))
@click.option("--data-dir", default=None, help="Target directory (default: resolved cache).")
def fetch(name, data_dir):
    """Download and cache a benchmark dataset from the UCI repository."""
    try:
        paths = dsreg.fetch(name, data_dir)
    except DataError as e:
        _fail(str(e))
    for p in paths:
        click.echo(str(p))


@main.command()
@click.option("--dataset", default=None, help="Registered dataset name (adult, cvrs).")
@click.option("--table", default=None, type=click.Path(), help="mdbench table file.")
@click.option("--data-dir", default=None)
@click.option("--association/--no-association", default=True)
@click.option("-o", "--output", default=None, type=click.Path(), help="Write JSON here.")
def inspect(dataset, table, data_dir, association, output):
    """Report missing-data patterns (and feature associations) as JSON."""
    ds = _load_input(dataset, table, data_dir)
    report = missing_pattern_summary(ds, with_association=association)
    text = report.to_json()
    if output:
        Path(output).write_text(text + "\n")
    else:
        click.echo(text)


@main.command()
@click.option("--dataset", default=None)
@click.option("--table", default=None, type=click.Path())
@click.option("--data-dir", default=None)
@click.option("--mechanism", type=click.Choice(["MCAR", "MNAR"]), default="MCAR")
@click.option("--delta", type=float, required=True)
@click.option("--seed", type=int, default=DEFAULT_SEED)
@click.option("--focus-token", default=None, help="MNAR: focus category token.")
@click.option("--out", required=True, type=click.Path(), help="Perturbed table file.")
@click.option("--receipt", default=None, type=click.Path(), help="Receipt JSON path.")
def perturb(dataset, table, data_dir, mechanism, delta, seed, focus_token, out, receipt):
    """Inject additional missingness into categorical features."""
    ds = _load_input(dataset, table, data_dir)
    try:
        if mechanism == "MCAR":
            perturbed, rec = perturb_mcar(ds, delta, seed)
        else:
            focus = default_mnar_focus(ds, focus_token)
            perturbed, rec = perturb_mnar(ds, delta, seed, focus)
    except DataError as e:
        _fail(str(e))
    perturbed.save(out)
    if receipt:
        Path(receipt).write_text(rec.to_json() + "\n")
    click.echo(
        f"masked {len(rec.masked_cells)} cells; categorical missing fraction "
        f"{rec.preexisting_fraction:.4f} -> {rec.achieved_fraction:.4f}",
        err=True,
    )


@main.command()
@click.option("--dataset", default=None)
@click.option("--table", default=None, type=click.Path())
@click.option("--data-dir", default=None)
@click.option("--method", type=click.Choice(METHODS), required=True)
@click.option("-k", type=int, default=5, help="Neighbors for knn.")
@click.option("--predictor", type=click.Choice(PREDICTOR_FAMILIES), default="logistic")
@click.option("--seed", type=int, default=DEFAULT_SEED)
@click.option("--out", required=True, type=click.Path())
def impute(dataset, table, data_dir, method, k, predictor, seed, out):
    """Fit an imputer on the input data and write the imputed table."""
    ds = _load_input(dataset, table, data_dir)
    try:
        imputer = fit_imputer(method, ds, k=k, predictor=predictor, seed=seed)
        result = imputer.transform(ds)
    except DataError as e:
        _fail(str(e))
    result.save(out)
    for note in imputer.notes:
        click.echo(f"note: {note}", err=True)


@main.command()
@click.option("--dataset", default=None)
@click.option("--table", default=None, type=click.Path())
@click.option("--data-dir", default=None)
@click.option("--classifier", "kind", required=True,
              type=click.Choice(["decision_tree", "random_forest", "mlp", "logistic", "linear_svm"]))
@click.option("--treatment", type=click.Choice(["one_hot", *METHODS]), default="one_hot")
@click.option("-k", type=int, default=5)
@click.option("--predictor", type=click.Choice(PREDICTOR_FAMILIES), default="logistic")
@click.option("--delta", type=float, default=0.0)
@click.option("--mechanism", type=click.Choice(["MCAR", "MNAR"]), default="MCAR")
@click.option("--train-fraction", type=float, default=2.0 / 3.0)
@click.option("--seed", type=int, default=DEFAULT_SEED)
@click.option("--epochs", type=int, default=15)
@click.option("--hidden", default="128,128", help="MLP hidden widths, comma separated.")
@click.option("--n-trees", type=int, default=100)
@click.option("--max-depth", type=int, default=None)
@click.option("--save", "model_out", default=None, type=click.Path())
def train(dataset, table, data_dir, kind, treatment, k, predictor, delta, mechanism,
          train_fraction, seed, epochs, hidden, n_trees, max_depth, model_out):
    """Split, perturb, treat, train one classifier, and report error rates."""
    ds = _load_input(dataset, table, data_dir)
    try:
        tr, te = split(ds, train_fraction, substream_seed(seed, "split"))
        if delta > 0:
            pseed = substream_seed(seed, "perturb")
            if mechanism == "MCAR":
                tr, _ = perturb_mcar(tr, delta, pseed)
            else:
                tr, _ = perturb_mnar(tr, delta, pseed, default_mnar_focus(tr))
        if treatment == "one_hot":
            enc = fit_encoder(tr, ds.mask.any(axis=0))
            Xtr, Xte = encode(tr, enc), encode(te, enc)
        else:
            imp = fit_imputer(treatment, tr, k=k, predictor=predictor,
                              seed=substream_seed(seed, "impute"))
            enc = fit_encoder(imp.transform(tr))
            Xtr, Xte = encode(imp.transform(tr), enc), encode(imp.transform(te), enc)
        n_classes = len(ds.label_names)
        mseed = substream_seed(seed, "model")
        if kind == "mlp":
            widths = tuple(int(w) for w in hidden.split(",") if w)
            model = train_mlp(Xtr.X, Xtr.y, n_classes,
                              MlpParams(hidden_layers=widths, epochs=epochs, seed=mseed))
        elif kind == "logistic":
            model = train_logistic(Xtr.X, Xtr.y, n_classes,
                                   MlpParams(epochs=epochs, seed=mseed))
        elif kind == "linear_svm":
            model = train_linear_svm(Xtr.X, Xtr.y, n_classes, SvmParams(seed=mseed))
        elif kind == "decision_tree":
            model = train_decision_tree(Xtr.X, Xtr.y, n_classes, TreeParams(max_depth=max_depth))
        else:
            model = train_random_forest(
                Xtr.X, Xtr.y, n_classes,
                ForestParams(n_trees=n_trees, seed=mseed,
                             tree=TreeParams(max_depth=max_depth)),
            )
    except DataError as e:
        _fail(str(e))
    train_err = error_rate(model.predict(Xtr.X), Xtr.y)
    test_err = error_rate(model.predict(Xte.X), Xte.y)
    click.echo(json.dumps({"train_error": train_err, "test_error": test_err}))
    if model_out:
        save_model(model, model_out)


# -- bench config ------------------------------------------------------------

_TOP_KEYS = {
    "dataset", "data_dir", "treatments", "classifiers", "deltas", "mechanism",
    "mnar_focus_token", "base_seed", "train_fraction", "stratified",
    "output", "format", "timing", "jobs", "figures",
}
_TREATMENT_KEYS = {"method", "k", "predictor"}
_CLF_KEYS = {
    "mlp": {"kind", "hidden_layers", "dropout_rates", "adadelta_rho", "adadelta_eps",
            "lr_scale", "momentum", "epochs", "batch_size"},
    "logistic": {"kind", "epochs", "batch_size", "adadelta_rho", "adadelta_eps", "lr_scale"},
    "linear_svm": {"kind", "l2", "lr0", "lr_decay", "epochs", "batch_size"},
    "decision_tree": {"kind", "max_depth", "min_samples_split"},
    "random_forest": {"kind", "bootstrap", "max_depth", "min_samples_split"},
}
_CUSTOM_DATASET_KEYS = {"paths", "kinds", "label_column", "feature_names",
                        "missing_symbol", "table"}


def _reject_unknown(d: dict, allowed: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise GridError(f"unknown keys in {where}: {sorted(unknown)}")


def _parse_treatment(item) -> Treatment:
    if item == "one_hot":
        return Treatment("one_hot")
    if isinstance(item, str):
        return Treatment("impute", method=item)
    _reject_unknown(item, _TREATMENT_KEYS, "treatment")
    return Treatment("impute", **item)


def _parse_classifier(item) -> ClassifierSpec:
    if isinstance(item, str):
        item = {"kind": item}
    kind = item.get("kind")
    if kind not in _CLF_KEYS:
        raise GridError(f"unknown classifier kind {kind!r}")
    _reject_unknown(item, _CLF_KEYS[kind], f"classifier {kind}")
    params = {key: v for key, v in item.items() if key != "kind"}
    for key in ("hidden_layers", "dropout_rates", "momentum"):
        if key in params:
            params[key] = tuple(params[key])
    if kind in ("mlp", "logistic"):
        return ClassifierSpec(kind, mlp=MlpParams(**params))
    if kind == "linear_svm":
        return ClassifierSpec(kind, svm=SvmParams(**params))
    if kind == "decision_tree":
        return ClassifierSpec(kind, tree=TreeParams(**params))
    tree_keys = {key: params.pop(key) for key in ("max_depth", "min_samples_split")
                 if key in params}
    return ClassifierSpec(kind, forest=ForestParams(tree=TreeParams(**tree_keys), **params))


def _load_config_dataset(cfg) -> Dataset:
    spec = cfg["dataset"]
    if isinstance(spec, str):
        return dsreg.load_dataset(spec, cfg.get("data_dir"))
    _reject_unknown(spec, _CUSTOM_DATASET_KEYS, "dataset")
    if "table" in spec:
        return Dataset.load(spec["table"])
    return load_uci(
        spec["paths"],
        schema_hint=spec["kinds"],
        label_column=spec["label_column"],
        missing_symbol=spec.get("missing_symbol", "?"),
        feature_names=spec.get("feature_names"),
    )


def load_bench_config(path):
    """Parse and validate a bench config; returns (grid, full dataset, options)."""
    with open(path) as fh:
        cfg = json.load(fh)
    _reject_unknown(cfg, _TOP_KEYS, "config")
    for key in ("dataset", "treatments", "classifiers", "deltas", "output"):
        if key not in cfg:
            raise GridError(f"config is missing required key {key!r}")
    treatments = tuple(_parse_treatment(t) for t in cfg["treatments"])
    classifiers = tuple(_parse_classifier(c) for c in cfg["classifiers"])
    spec = cfg["dataset"]
    dataset_id = spec if isinstance(spec, str) else "custom"
    grid = ExperimentGrid(
        dataset_id=dataset_id,
        treatments=treatments,
        classifiers=classifiers,
        deltas=tuple(cfg["deltas"]),
        mechanism=cfg.get("mechanism", "MCAR"),
        base_seed=cfg.get("base_seed", DEFAULT_SEED),
        train_fraction=cfg.get("train_fraction", 2.0 / 3.0),
        stratified=cfg.get("stratified", False),
        mnar_focus_token=cfg.get("mnar_focus_token"),
    )
    full = _load_config_dataset(cfg)
    options = {
        "output": cfg["output"],
        "format": cfg.get("format", "csv"),
        "timing": cfg.get("timing", True),
        "jobs": cfg.get("jobs", 1),
        "figures": cfg.get("figures", False),
    }
    return grid, full, options


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--jobs", type=int, default=None, help="Override config worker count.")
def bench(config_path, jobs):
    """Run the full experiment grid from a JSON config and write the report."""
    try:
        grid, full, options = load_bench_config(config_path)
    except (GridError, DataError, KeyError, TypeError, json.JSONDecodeError) as e:
        _fail(f"invalid config: {e}")
    results, failures = run_grid(grid, full, jobs=jobs or options["jobs"])
    if results:
        emit_report(results, options["output"], options["format"], timing=options["timing"])
        click.echo(f"wrote {len(results)} results to {options['output']}", err=True)
        if options["figures"]:
            from mdbench.figures import render_report_figures

            outdir = Path(options["output"]).parent
            for p in render_report_figures(report_rows(results), outdir):
                click.echo(f"wrote {p}", err=True)
    for f in failures:
        click.echo(
            f"cell {f.cell_index} failed ({f.classifier}, {f.treatment}, "
            f"delta={f.delta}): {f.message}",
            err=True,
        )
    sys.exit(1 if failures else 0)


@main.command("report")
@click.argument("report_file", type=click.Path(exists=True))
@click.option("--figures-dir", default=None, type=click.Path(),
              help="Render figures into this directory (default: alongside the report).")
@click.option("--to", "convert_to", type=click.Choice(["csv", "json"]), default=None)
@click.option("-o", "--output", default=None, type=click.Path())
def report_cmd(report_file, figures_dir, convert_to, output):
    """Render figures from an existing report; optionally convert its format."""
    try:
        rows = parse_report(report_file)
    except (ValueError, OSError) as e:
        _fail(str(e))
    from mdbench.figures import render_report_figures

    outdir = figures_dir or Path(report_file).parent
    for p in render_report_figures(rows, outdir):
        click.echo(f"wrote {p}", err=True)
    if convert_to:
        if not output:
            _fail("--to needs -o/--output")
        if convert_to == "json":
            Path(output).write_text(json.dumps(rows, indent=2) + "\n")
        else:
            from mdbench.report import _csv_text

            Path(output).write_text(_csv_text(rows))


if __name__ == "__main__":
    main()
