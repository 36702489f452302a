"""Render experiment tables as figures next to the CSV output.

Headless by construction: the Agg backend is forced before pyplot
loads, so rendering works without a display server.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import CAPACITY_SCHEMES, CsvTable, ExperimentConfig

__all__ = ["render_figure"]


def _surface(ax, table: CsvTable, value_col: str, label: str):
    a_t = np.asarray(table.column("alpha_t"))
    a_f = np.asarray(table.column("alpha_f"))
    z = np.asarray(table.column(value_col))
    side = len(np.unique(a_t))
    grid = z.reshape(side, side)
    im = ax.imshow(
        grid,
        origin="lower",
        aspect="auto",
        extent=(a_f.min(), a_f.max(), a_t.min(), a_t.max()),
    )
    ax.set_xlabel("spectral correlation")
    ax.set_ylabel("temporal correlation")
    return im, label


def _render_mse_surface(fig, table: CsvTable) -> None:
    ax = fig.subplots()
    im, label = _surface(ax, table, "mse_analytic", "prediction MSE")
    fig.colorbar(im, ax=ax, label=label)
    ax.set_title("Transmitter-side prediction MSE")


def _render_rate_surface(fig, table: CsvTable) -> None:
    ax = fig.subplots()
    im, label = _surface(ax, table, "bits_2d", "bits per matrix")
    fig.colorbar(im, ax=ax, label=label)
    ax.set_title("Minimal differential feedback rate")


def _render_rate_section(fig, table: CsvTable) -> None:
    ax = fig.subplots()
    alpha = table.column("alpha")
    for col, style in (("bits_nondiff", "k:"), ("bits_1d", "C1--"), ("bits_2d", "C0-")):
        ax.plot(alpha, table.column(col), style, label=col)
    ax.set_xlabel("correlation (both axes)")
    ax.set_ylabel("bits per matrix")
    ax.set_title("Feedback rate on the diagonal")
    ax.legend()


def _render_capacity(fig, table: CsvTable) -> None:
    ax = fig.subplots()
    bits = np.asarray(table.column("bits"))
    scheme = np.asarray(table.column("scheme"))
    mean = np.asarray(table.column("capacity_mean"))
    err = np.asarray(table.column("stderr"))
    for name in CAPACITY_SCHEMES:
        sel = scheme == name
        ax.errorbar(bits[sel], mean[sel], yerr=err[sel], marker="o", capsize=3, label=name)
    ax.set_xlabel("feedback bits per matrix")
    ax.set_ylabel("ergodic capacity (bits/channel use)")
    ax.set_title("Closed-loop capacity vs feedback budget")
    ax.legend()


_RENDERERS = {
    "mse_surface": _render_mse_surface,
    "rate_surface": _render_rate_surface,
    "rate_section": _render_rate_section,
    "capacity": _render_capacity,
}


def render_figure(table: CsvTable, cfg: ExperimentConfig, path: str) -> None:
    """Write a PNG view of ``table`` for the experiment in ``cfg``."""
    fig = plt.figure(figsize=(6.0, 4.5))
    try:
        _RENDERERS[cfg.experiment](fig, table)
        fig.tight_layout()
        fig.savefig(path, dpi=150)
    finally:
        plt.close(fig)
