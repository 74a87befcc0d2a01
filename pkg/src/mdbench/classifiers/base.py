"""Shared classifier plumbing: error metric and training failures."""

from __future__ import annotations

import numpy as np

__all__ = ["TrainingDivergedError", "error_rate"]


class TrainingDivergedError(RuntimeError):
    """Non-finite loss during training (exploding step)."""


def error_rate(pred, truth) -> float:
    """Fraction of mismatched labels, in [0, 1]."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("prediction and truth shapes differ")
    if pred.size == 0:
        raise ValueError("empty label vectors")
    return float(np.mean(pred != truth))
