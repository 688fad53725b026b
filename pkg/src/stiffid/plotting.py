"""Figures written next to the CSV study outputs (opt-in via ``--figures``)."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .studies import HIST_BINS


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    return path


def plot_error_histograms(result, path, bins=HIST_BINS):
    fig = Figure(figsize=(10, 5.5))
    axes = fig.subplots(2, 3)
    for row, (name, errs, unit) in enumerate((("t", result.errors_t, "mm"),
                                              ("phi", result.errors_phi, "deg"))):
        for j, ax_name in enumerate("xyz"):
            ax = axes[row, j]
            ax.hist(errs[:, j], bins=bins, color="0.6", edgecolor="k", linewidth=0.5)
            ax.set_xlabel(f"{name}_{ax_name} error [{unit}]")
            ax.ticklabel_format(axis="x", style="sci", scilimits=(-2, 2))
    axes[0, 0].set_ylabel("count")
    axes[1, 0].set_ylabel("count")
    fig.suptitle(f"identification errors, {len(result.errors_t)} trials, sigma = {result.sigma:.3g} mm")
    fig.tight_layout()
    return _save(fig, path)


def plot_amplitude_errors(rows, path):
    """Log-log error vs amplitude, one line per method (table2/table3 rows)."""
    amp_key = next(k for k in rows[0] if k.startswith("amplitude"))
    err_key = next(k for k in rows[0] if k.startswith("error"))
    fig = Figure(figsize=(5, 4))
    ax = fig.subplots()
    for m in dict.fromkeys(r["method"] for r in rows):
        pts = [(r[amp_key], r[err_key]) for r in rows if r["method"] == m]
        x, y = zip(*pts)
        # exact zeros would vanish on a log axis
        y = np.maximum(y, np.finfo(float).tiny)
        ax.loglog(x, y, marker="o", label=m)
    ax.set_xlabel(amp_key.replace("_", " [") + "]")
    ax.set_ylabel(err_key.replace("_", " [") + "]")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def plot_compliance(report, path):
    """Relative element errors of the benchmark with pruned elements hatched out."""
    fig = Figure(figsize=(5, 4.2))
    ax = fig.subplots()
    err = report.relative_errors()
    shown = np.where(report.analytic != 0, err, np.nan)
    im = ax.imshow(shown, cmap="viridis")
    fig.colorbar(im, ax=ax, label="relative error")
    for i in range(6):
        for j in range(6):
            if not report.final.significant[i, j]:
                ax.text(j, i, "0", ha="center", va="center", color="0.5")
    labels = [f"{i + 1}" for i in range(6)]
    ax.set_xticks(range(6), labels)
    ax.set_yticks(range(6), labels)
    ax.set_title(f"k identification, max error {report.max_relative_error:.2%}")
    return _save(fig, path)
