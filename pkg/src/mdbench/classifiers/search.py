"""Exhaustive grid search minimizing mean training error."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

__all__ = ["GridSearchResult", "grid_search"]


@dataclass
class GridSearchResult:
    best_params: dict
    best_error: float
    best_model: object
    trace: list  # one {"params", "train_error"} dict per grid point, in order


def grid_search(space: dict, builder) -> GridSearchResult:
    """Train one model per grid point and keep the lowest training error.

    ``space`` maps axis name to a list of values; points are visited in
    itertools.product order over the axes as declared. ``builder`` takes a
    params dict and returns a trained model exposing ``train_error``. Ties go
    to the earliest point. Raises if every point fails to train.
    """
    axes = list(space)
    if not axes or any(len(space[a]) == 0 for a in axes):
        raise ValueError("grid search space must have non-empty axes")
    best = None
    trace = []
    failures = []
    for combo in itertools.product(*(space[a] for a in axes)):
        params = dict(zip(axes, combo))
        try:
            model = builder(params)
        except Exception as e:  # noqa: BLE001 - searches keep going per point
            trace.append({"params": params, "train_error": None, "error": str(e)})
            failures.append((params, e))
            continue
        err = float(model.train_error)
        trace.append({"params": params, "train_error": err})
        if best is None or err < best[1]:
            best = (params, err, model)
    if best is None:
        raise RuntimeError(f"every grid point failed to train: {failures}")
    return GridSearchResult(best[0], best[1], best[2], trace)
