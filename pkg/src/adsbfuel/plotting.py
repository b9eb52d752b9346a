"""Matplotlib figures written next to the CLI's delimited output."""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (7.0, 4.2),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
    "legend.fontsize": 8,
    "legend.frameon": False,
}


def _save(fig, path) -> str:
    path = os.fspath(path)
    tmp = path + ".tmp" + os.path.splitext(path)[1]
    fig.savefig(tmp, dpi=120, bbox_inches="tight")
    plt.close(fig)
    os.replace(tmp, path)
    return path


def plot_curve(T, Q, q, path, alt_t=None, alt=None, q_ref=None, title: str | None = None) -> str:
    """Cumulative fuel, fuel flow and (optionally) altitude against time."""
    with plt.rc_context(STYLE):
        rows = 3 if alt is not None else 2
        fig, axes = plt.subplots(rows, 1, sharex=True, figsize=(7.0, 2.2 * rows))
        axes[0].plot(T, Q, lw=1.2, color="C0")
        axes[0].set_ylabel("cumulative fuel [kg]")
        axes[1].plot(T, q, lw=1.0, color="C1", label="reconstructed")
        if q_ref is not None:
            axes[1].plot(T, q_ref, lw=1.0, color="k", ls="--", label="reference")
            axes[1].legend()
        axes[1].set_ylabel("fuel flow [kg/s]")
        if alt is not None:
            axes[2].plot(alt_t, alt, lw=1.0, color="C2")
            axes[2].set_ylabel("altitude [m]")
        axes[-1].set_xlabel("time [s]")
        if title:
            axes[0].set_title(title)
        return _save(fig, path)


def plot_convergence(sizes: Sequence[float], errors: np.ndarray, radii: Sequence[int], slopes, path) -> str:
    """Log-log error against dataset size, one line per truncation radius."""
    errors = np.asarray(errors, dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for k, N in enumerate(radii):
            ax.loglog(sizes, errors[:, k], marker="o", ms=3, label=f"N = {N} (slope {slopes[k]:+.3f})")
        ax.set_xlabel("training samples")
        ax.set_ylabel("MAPE")
        ax.legend()
        return _save(fig, path)


def plot_groups(labels: Sequence[str], values: Sequence[float], counts: Sequence[int], path, xlabel: str) -> str:
    """Bar chart of MAPE per group with sample counts on top."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        x = np.arange(len(labels))
        bars = ax.bar(x, 100.0 * np.asarray(values, dtype=float), color="C0", alpha=0.8)
        for b, n in zip(bars, counts):
            ax.annotate(str(n), (b.get_x() + b.get_width() / 2, b.get_height()), ha="center", va="bottom", fontsize=7)
        ax.set_xticks(x, labels, rotation=30, ha="right")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("MAPE [%]")
        return _save(fig, path)


def plot_history(loss: Sequence[float], lr: Sequence[float], path) -> str:
    """Per-epoch training loss (log scale) with the learning rate on a twin axis."""
    ep = np.arange(1, len(loss) + 1)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.semilogy(ep, loss, color="C0", lw=1.2)
        ax.set_xlabel("epoch")
        ax.set_ylabel("training loss", color="C0")
        ax2 = ax.twinx()
        ax2.plot(ep, lr, color="C3", lw=0.8, ls=":")
        ax2.set_ylabel("learning rate", color="C3")
        ax2.grid(False)
        return _save(fig, path)
