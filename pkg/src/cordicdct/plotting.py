"""Figures written next to the CLI's delimited reports."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_matrix_error(approx: np.ndarray, exact: np.ndarray, path: str | Path, title: str = "") -> Path:
    """Approximate transform matrix beside its deviation from the exact DCT."""
    with plt.rc_context(STYLE):
        fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(7.0, 3.0))
        im0 = ax0.imshow(approx, cmap="RdBu_r", vmin=-0.5, vmax=0.5)
        ax0.set_title("scaled matrix")
        fig.colorbar(im0, ax=ax0, fraction=0.046)
        err = approx - exact
        lim = max(float(np.max(np.abs(err))), 1e-15)
        im1 = ax1.imshow(err, cmap="RdBu_r", vmin=-lim, vmax=lim)
        ax1.set_title("error vs DCT-II")
        fig.colorbar(im1, ax=ax1, fraction=0.046)
        for ax in (ax0, ax1):
            ax.set_xlabel("n")
            ax.set_ylabel("k")
            ax.set_xticks(range(8))
            ax.set_yticks(range(8))
        if title:
            fig.suptitle(title)
        return _save(fig, path)


def plot_costs(rows: Mapping[str, Mapping[str, float]], path: str | Path) -> Path:
    """Grouped bars of additions, shifts and critical-path adders per design."""
    keys = ("additions", "shifts", "path_adders")
    labels = list(rows)
    x = np.arange(len(keys))
    w = 0.8 / max(len(labels), 1)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.0))
        for i, name in enumerate(labels):
            vals = [rows[name][k] for k in keys]
            bars = ax.bar(x + (i - (len(labels) - 1) / 2) * w, vals, w, label=name)
            ax.bar_label(bars, fmt="%g", fontsize=7, padding=1)
        ax.set_xticks(x)
        ax.set_xticklabels(["additions", "shifts", "critical path (T_ADD)"])
        ax.legend(frameon=False)
        ax.spines[["top", "right"]].set_visible(False)
        return _save(fig, path)


def plot_port_errors(port_max: list[float], path: str | Path, title: str = "") -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 2.8))
        ax.bar(range(len(port_max)), port_max, color="0.4")
        ax.set_xlabel("output k")
        ax.set_ylabel("max |error|")
        ax.set_xticks(range(len(port_max)))
        ax.spines[["top", "right"]].set_visible(False)
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_roundtrip(original: np.ndarray, recon: np.ndarray, path: str | Path, title: str = "") -> Path:
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 3, figsize=(9.0, 3.2))
        diff = recon.astype(float) - original.astype(float)
        lim = max(float(np.max(np.abs(diff))), 1.0)
        axes[0].imshow(original, cmap="gray", vmin=0, vmax=255)
        axes[0].set_title("original")
        axes[1].imshow(recon, cmap="gray", vmin=0, vmax=255)
        axes[1].set_title("reconstructed")
        im = axes[2].imshow(diff, cmap="RdBu_r", vmin=-lim, vmax=lim)
        axes[2].set_title("difference")
        fig.colorbar(im, ax=axes[2], fraction=0.046)
        for ax in axes:
            ax.set_xticks([])
            ax.set_yticks([])
        if title:
            fig.suptitle(title)
        return _save(fig, path)
