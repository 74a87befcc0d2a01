"""Render benchmark reports as error-rate figures.

For each (dataset, mechanism) in a report, draws a two-panel chart: test
error vs. perturbation rate for the one-hot treatment (top) and for every
imputed treatment (bottom), with +-1 standard deviation error bars. Files are
written next to the delimited report output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["render_report_figures"]

_MARKERS = ["o", "s", "^", "D", "v", "P", "X", "*"]


def _series(rows):
    """Group rows into {(classifier, treatment): sorted [(delta, error, stdev)]}."""
    out = {}
    for r in rows:
        key = (r["classifier"], r["treatment"])
        out.setdefault(key, []).append((r["delta"], r["error"], r["stdev"]))
    for pts in out.values():
        pts.sort()
    return out


def _draw_panel(ax, series, title):
    for i, ((clf, treat), pts) in enumerate(sorted(series.items())):
        deltas = [p[0] for p in pts]
        errs = [p[1] for p in pts]
        sds = [p[2] for p in pts]
        label = clf if treat == "one_hot" else f"{clf} / {treat}"
        ax.errorbar(
            deltas,
            errs,
            yerr=sds,
            marker=_MARKERS[i % len(_MARKERS)],
            capsize=3,
            linewidth=1.2,
            markersize=4,
            label=label,
        )
    ax.set_title(title, fontsize=10)
    ax.set_ylabel("test set error")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7, frameon=False)


def render_report_figures(rows, outdir, prefix: str = "errors") -> list[Path]:
    """Render one figure per (dataset, mechanism) pair; returns written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    pairs = sorted({(r["dataset"], r["mechanism"]) for r in rows})
    for dataset, mechanism in pairs:
        sel = [r for r in rows if r["dataset"] == dataset and r["mechanism"] == mechanism]
        onehot = _series([r for r in sel if r["treatment"] == "one_hot"])
        imputed = _series([r for r in sel if r["treatment"] != "one_hot"])
        panels = [p for p in (("no imputation", onehot), ("with imputation", imputed)) if p[1]]
        if not panels:
            continue
        fig, axes = plt.subplots(
            len(panels), 1, figsize=(7, 3.2 * len(panels)), squeeze=False
        )
        for ax, (name, series) in zip(axes[:, 0], panels):
            _draw_panel(ax, series, f"{dataset} ({mechanism}) - {name}")
        axes[-1, 0].set_xlabel("perturbation rate")
        fig.tight_layout()
        path = outdir / f"{prefix}_{dataset}_{mechanism.lower()}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
