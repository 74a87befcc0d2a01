import math
from pathlib import Path

import numpy as np
import pytest

from mdbench.data import CATEGORICAL, CONTINUOUS, Dataset, FeatureSchema

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

ADULT_FILES = ["adult.data", "adult.test"]
CVRS_FILES = ["house-votes-84.data"]


def _have(files):
    return all((DATA_DIR / f).is_file() for f in files)


requires_adult = pytest.mark.skipif(
    not _have(ADULT_FILES), reason="UCI Adult files not present in data/"
)
requires_cvrs = pytest.mark.skipif(
    not _have(CVRS_FILES), reason="UCI CVRs file not present in data/"
)


def toy_dataset(kinds, rows, labels, names=None):
    """Build a Dataset from literal cells; None marks a missing value.

    Categorical vocabularies and the label vocabulary are collected in
    first-seen order, like the UCI loader does.
    """
    n_cols = len(kinds)
    names = names or [f"f{j}" for j in range(n_cols)]
    schema = []
    columns = []
    for j, kind in enumerate(kinds):
        cells = [row[j] for row in rows]
        if kind == CATEGORICAL:
            vocab = {}
            codes = []
            for c in cells:
                if c is None:
                    codes.append(-1)
                else:
                    codes.append(vocab.setdefault(c, len(vocab)))
            schema.append(FeatureSchema(names[j], CATEGORICAL, tuple(vocab)))
            columns.append(np.array(codes, dtype=np.int64))
        else:
            schema.append(FeatureSchema(names[j], CONTINUOUS))
            columns.append(
                np.array([math.nan if c is None else float(c) for c in cells])
            )
    lab_vocab = {}
    lab_codes = [lab_vocab.setdefault(l, len(lab_vocab)) for l in labels]
    return Dataset(schema, columns, np.array(lab_codes), tuple(lab_vocab))


def random_categorical_dataset(rng, n, k, n_cats=3, n_classes=2, missing_rate=0.0):
    """Synthetic all-categorical dataset with independent uniform features."""
    rows = []
    cats = [f"c{v}" for v in range(n_cats)]
    for _ in range(n):
        row = []
        for _j in range(k):
            if missing_rate and rng.random() < missing_rate:
                row.append(None)
            else:
                row.append(cats[rng.integers(n_cats)])
        rows.append(row)
    labels = [f"L{rng.integers(n_classes)}" for _ in range(n)]
    return toy_dataset([CATEGORICAL] * k, rows, labels)


@pytest.fixture(scope="session")
def adult():
    from mdbench.datasets import load_dataset

    if not _have(ADULT_FILES):
        pytest.skip("UCI Adult files not present in data/")
    return load_dataset("adult", DATA_DIR)


@pytest.fixture(scope="session")
def cvrs():
    from mdbench.datasets import load_dataset

    if not _have(CVRS_FILES):
        pytest.skip("UCI CVRs file not present in data/")
    return load_dataset("cvrs", DATA_DIR)
