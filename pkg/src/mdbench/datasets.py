"""Benchmark dataset registry: UCI Adult and Congressional Voting Records.

Files are looked up in a data directory resolved from (in order) an explicit
argument, the MDBENCH_DATA_DIR environment variable, a ./data directory, or
~/.cache/mdbench. The ``fetch`` helper downloads them from the UCI repository
with optional sha256 verification.
"""

from __future__ import annotations

import hashlib
import os
import urllib.request
from pathlib import Path

from mdbench.data import CATEGORICAL, CONTINUOUS, DataError, Dataset, load_uci

__all__ = [
    "DATASETS",
    "resolve_data_dir",
    "dataset_files",
    "load_dataset",
    "fetch",
]

_ADULT_KINDS = [
    CONTINUOUS,   # age
    CATEGORICAL,  # workclass
    CONTINUOUS,   # fnlwgt
    CATEGORICAL,  # education
    CONTINUOUS,   # education-num
    CATEGORICAL,  # marital-status
    CATEGORICAL,  # occupation
    CATEGORICAL,  # relationship
    CATEGORICAL,  # race
    CATEGORICAL,  # sex
    CONTINUOUS,   # capital-gain
    CONTINUOUS,   # capital-loss
    CONTINUOUS,   # hours-per-week
    CATEGORICAL,  # native-country
    CATEGORICAL,  # income label
]

_ADULT_NAMES = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
]

_VOTE_NAMES = [
    "handicapped-infants", "water-project-cost-sharing",
    "adoption-of-the-budget-resolution", "physician-fee-freeze",
    "el-salvador-aid", "religious-groups-in-schools",
    "anti-satellite-test-ban", "aid-to-nicaraguan-contras", "mx-missile",
    "immigration", "synfuels-corporation-cutback", "education-spending",
    "superfund-right-to-sue", "crime", "duty-free-exports",
    "export-administration-act-south-africa",
]

_UCI_BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases"

DATASETS = {
    "adult": {
        "files": ["adult.data", "adult.test"],
        "urls": [f"{_UCI_BASE}/adult/adult.data", f"{_UCI_BASE}/adult/adult.test"],
        # sha256 of upstream files is not pinned (adult.test circulates both
        # with and without its comment header / label periods); fetch prints
        # the computed digest so users can pin their own.
        "sha256": [None, None],
        "label_column": 14,
        "kinds": _ADULT_KINDS,
        "feature_names": _ADULT_NAMES,
        "strip_label_suffix": ".",
        "mnar_focus": None,  # modal category per feature
    },
    "cvrs": {
        "files": ["house-votes-84.data"],
        "urls": [f"{_UCI_BASE}/voting-records/house-votes-84.data"],
        "sha256": [None],
        "label_column": 0,
        "kinds": [CATEGORICAL] * 17,
        "feature_names": _VOTE_NAMES,
        "strip_label_suffix": None,
        "mnar_focus": "y",  # the "yea" token in the raw file
    },
}


def resolve_data_dir(data_dir=None) -> Path:
    if data_dir is not None:
        return Path(data_dir)
    env = os.environ.get("MDBENCH_DATA_DIR")
    if env:
        return Path(env)
    local = Path("data")
    if local.is_dir():
        return local
    return Path.home() / ".cache" / "mdbench"


def dataset_files(name: str, data_dir=None) -> list[Path]:
    if name not in DATASETS:
        raise DataError(f"unknown dataset {name!r}; known: {sorted(DATASETS)}")
    base = resolve_data_dir(data_dir)
    return [base / f for f in DATASETS[name]["files"]]


def load_dataset(name: str, data_dir=None) -> Dataset:
    """Load a registered benchmark dataset from the data directory."""
    entry = DATASETS[name] if name in DATASETS else None
    if entry is None:
        raise DataError(f"unknown dataset {name!r}; known: {sorted(DATASETS)}")
    paths = dataset_files(name, data_dir)
    missing = [str(p) for p in paths if not p.is_file()]
    if missing:
        raise DataError(
            f"dataset files not found: {missing}; run `mdbench fetch {name}` "
            "or set MDBENCH_DATA_DIR"
        )
    return load_uci(
        paths,
        schema_hint=entry["kinds"],
        label_column=entry["label_column"],
        missing_symbol="?",
        feature_names=entry["feature_names"],
        strip_label_suffix=entry["strip_label_suffix"],
    )


def fetch(name: str, data_dir=None, expected_sha256=None) -> list[Path]:
    """Download a registered dataset into the data directory.

    Returns the list of local paths. Existing files are kept. When a sha256
    digest is known (built-in or passed via ``expected_sha256``, a list
    aligned with the dataset's files), a mismatch raises DataError.
    """
    if name not in DATASETS:
        raise DataError(f"unknown dataset {name!r}; known: {sorted(DATASETS)}")
    entry = DATASETS[name]
    base = resolve_data_dir(data_dir)
    base.mkdir(parents=True, exist_ok=True)
    digests = expected_sha256 or entry["sha256"]
    out = []
    for fname, url, want in zip(entry["files"], entry["urls"], digests):
        dest = base / fname
        if not dest.is_file():
            try:
                with urllib.request.urlopen(url, timeout=60) as resp:
                    data = resp.read()
            except OSError as e:
                raise DataError(f"download failed for {url}: {e}") from e
            dest.write_bytes(data)
        got = hashlib.sha256(dest.read_bytes()).hexdigest()
        if want is not None and got != want:
            raise DataError(f"{dest}: sha256 mismatch: expected {want}, got {got}")
        out.append(dest)
    return out
