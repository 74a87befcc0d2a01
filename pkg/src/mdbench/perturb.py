"""Controlled missing-data perturbation of categorical training features.

The target rate ``delta`` is the TOTAL missing fraction over categorical
cells after perturbation, pre-existing missingness included. Masking uses an
exact cell count, round-half-up(delta * n * K_cat), so the achieved fraction
is deterministic. Labels and continuous features are never touched.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from mdbench.data import Dataset, DataError

__all__ = [
    "PerturbationError",
    "PerturbationSpec",
    "PerturbationReceipt",
    "perturb",
    "perturb_mcar",
    "perturb_mnar",
    "default_mnar_focus",
]

MECHANISMS = ("MCAR", "MNAR")

# Masking weight for cells holding a focus category under MNAR (vs 1 elsewhere).
MNAR_FOCUS_WEIGHT = 3.0


class PerturbationError(DataError):
    """Invalid perturbation request (rate, mechanism, or focus)."""


@dataclass(frozen=True)
class PerturbationSpec:
    mechanism: str
    delta: float
    seed: int
    mnar_focus: dict[str, str] | None = None

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise PerturbationError(f"unknown mechanism {self.mechanism!r}")
        ok = self.delta == 0.0 or 0.05 <= self.delta <= 0.95
        if not ok:
            raise PerturbationError(
                f"delta must be 0 or in [0.05, 0.95], got {self.delta}"
            )
        if self.mechanism == "MNAR" and self.delta > 0 and not self.mnar_focus:
            raise PerturbationError("MNAR perturbation needs a non-empty focus map")


@dataclass
class PerturbationReceipt:
    """Audit trail of one perturbation call."""

    mechanism: str
    delta: float
    seed: int
    masked_cells: list[tuple[int, int]]  # (row, feature) pairs
    achieved_fraction: float  # missing fraction over categorical cells, after
    preexisting_fraction: float

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(
            {
                "mechanism": self.mechanism,
                "delta": self.delta,
                "seed": self.seed,
                "n_masked": len(self.masked_cells),
                "masked_cells": [list(c) for c in self.masked_cells],
                "achieved_fraction": self.achieved_fraction,
                "preexisting_fraction": self.preexisting_fraction,
            },
            indent=indent,
        )


def _categorical_state(ds: Dataset):
    cat_idx = ds.categorical_indices
    if not cat_idx:
        raise PerturbationError("dataset has no categorical features to perturb")
    total = ds.n * len(cat_idx)
    existing = sum(int((ds.columns[j] == -1).sum()) for j in cat_idx)
    return cat_idx, total, existing


def _apply_mask(ds: Dataset, rows, cols) -> Dataset:
    new_cols = {}
    for j in set(cols.tolist()):
        col = ds.columns[j].copy()
        col[rows[cols == j]] = -1
        new_cols[j] = col
    return ds.replace_columns(new_cols)


def _perturb(ds, delta, seed, mechanism, weights_fn) -> tuple[Dataset, PerturbationReceipt]:
    cat_idx, total, existing = _categorical_state(ds)
    pre_fraction = existing / total
    if delta == 0.0:
        return ds, PerturbationReceipt(
            mechanism, 0.0, seed, [], pre_fraction, pre_fraction
        )
    target = int(math.floor(delta * total + 0.5))
    if existing > target:
        raise PerturbationError(
            f"pre-existing categorical missing fraction {pre_fraction:.4f} "
            f"already exceeds target delta {delta:.4f}"
        )
    need = target - existing
    if need == 0:
        return ds, PerturbationReceipt(
            mechanism, delta, seed, [], pre_fraction, pre_fraction
        )

    # Flat index over observed categorical cells, row-major in (row, feature).
    obs_rows = []
    obs_cols = []
    for j in cat_idx:
        rows = np.flatnonzero(ds.columns[j] != -1)
        obs_rows.append(rows)
        obs_cols.append(np.full(rows.shape, j, dtype=np.int64))
    obs_rows = np.concatenate(obs_rows)
    obs_cols = np.concatenate(obs_cols)

    rng = np.random.default_rng(seed)
    weights = weights_fn(ds, obs_rows, obs_cols)
    if weights is None:
        pick = rng.choice(len(obs_rows), size=need, replace=False)
    else:
        p = weights / weights.sum()
        pick = rng.choice(len(obs_rows), size=need, replace=False, p=p)
    pick = np.sort(pick)
    rows, cols = obs_rows[pick], obs_cols[pick]
    out = _apply_mask(ds, rows, cols)
    achieved = (existing + need) / total
    cells = list(zip(rows.tolist(), cols.tolist()))
    return out, PerturbationReceipt(mechanism, delta, seed, cells, achieved, pre_fraction)


def perturb_mcar(ds: Dataset, delta: float, seed: int) -> tuple[Dataset, PerturbationReceipt]:
    """Mask uniformly random observed categorical cells up to total rate delta."""
    PerturbationSpec("MCAR", delta, seed)
    return _perturb(ds, delta, seed, "MCAR", lambda *_: None)


def perturb_mnar(
    ds: Dataset, delta: float, seed: int, focus: dict[str, str]
) -> tuple[Dataset, PerturbationReceipt]:
    """Value-dependent masking: cells holding their feature's focus category
    get weight 3, all other observed categorical cells weight 1."""
    PerturbationSpec("MNAR", delta, seed, dict(focus) if focus else None)
    name_to_idx = {f.name: j for j, f in enumerate(ds.schema)}
    focus_codes = {}
    for fname, cat in focus.items():
        if fname not in name_to_idx:
            raise PerturbationError(f"focus feature {fname!r} not in schema")
        j = name_to_idx[fname]
        f = ds.schema[j]
        if not f.is_categorical:
            raise PerturbationError(f"focus feature {fname!r} is not categorical")
        if cat not in f.categories:
            raise PerturbationError(
                f"focus category {cat!r} not in feature {fname!r} vocabulary"
            )
        focus_codes[j] = f.categories.index(cat)

    def weights(ds, rows, cols):
        w = np.ones(len(rows))
        for j, code in focus_codes.items():
            sel = cols == j
            hit = ds.columns[j][rows[sel]] == code
            w[np.flatnonzero(sel)[hit]] = MNAR_FOCUS_WEIGHT
        return w

    return _perturb(ds, delta, seed, "MNAR", weights)


def default_mnar_focus(ds: Dataset, token: str | None = None) -> dict[str, str]:
    """Focus map covering every categorical feature.

    With ``token`` given, that category wherever the feature has it; otherwise
    each feature's modal observed category.
    """
    focus = {}
    for j in ds.categorical_indices:
        f = ds.schema[j]
        if token is not None and token in f.categories:
            focus[f.name] = token
            continue
        col = ds.columns[j]
        obs = col[col != -1]
        if len(obs) == 0:
            continue
        counts = np.bincount(obs, minlength=len(f.categories))
        focus[f.name] = f.categories[int(np.argmax(counts))]
    if not focus:
        raise PerturbationError("no categorical feature has observed values")
    return focus


def perturb(
    ds: Dataset, spec: PerturbationSpec
) -> tuple[Dataset, PerturbationReceipt]:
    """Dispatch on a PerturbationSpec."""
    if spec.mechanism == "MCAR":
        return perturb_mcar(ds, spec.delta, spec.seed)
    focus = spec.mnar_focus or default_mnar_focus(ds)
    return perturb_mnar(ds, spec.delta, spec.seed, focus)
