"""
Figures for test reports and Julia set renders.

Functions:
    plot_test_histogram: Observed against expected category counts of one test.
    plot_battery_histograms: Grid of histograms for every test recording counts.
    plot_julia: Escape-time image of a render, optionally with its boundary.
"""
from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence
    from typing import Any, Optional

    from .julia import JuliaApprox
    from .statistics.report import TestResult

import math

import numpy as np
from matplotlib import pyplot as plt

from .statistics.report import figure_data

OBSERVED_COLOR = "tab:blue"
EXPECTED_COLOR = "tab:orange"


def plot_test_histogram(
    figure: dict[str, Any],
    ax: Optional[plt.Axes] = None,
    width: float = 0.4,
) -> plt.Axes:
    """Side-by-side bars of observed and expected counts.

    Parameters
    ----------
    figure : dict
        One entry of :func:`pychaoscipher.statistics.report.figure_data`.
    ax : plt.Axes, optional
        Axes to draw on, a new figure is created otherwise.
    width : float, default=0.4
        Bar width.
    """
    if ax is None:
        _, ax = plt.subplots()

    positions = np.arange(len(figure["observed"]))
    ax.bar(positions - width / 2, figure["observed"], width, label="observed", color=OBSERVED_COLOR)
    ax.bar(positions + width / 2, figure["expected"], width, label="expected", color=EXPECTED_COLOR)

    categories = [str(c) for c in figure["categories"]]
    ax.set_xticks(positions)
    ax.set_xticklabels(categories, rotation=90 if len(categories) > 8 else 0)
    ax.set_title(figure.get("label", figure["name"]))
    ax.set_ylabel("count")
    ax.legend()

    return ax


def plot_battery_histograms(results: Sequence[TestResult], n_cols: int = 3) -> plt.Figure:
    figures = figure_data(results)
    n_rows = max(1, math.ceil(len(figures) / n_cols))

    fig, axes = plt.subplots(n_rows, n_cols, figsize=(5 * n_cols, 4 * n_rows), squeeze=False)
    for ax, figure in zip(axes.flat, figures):
        plot_test_histogram(figure, ax=ax)
    for ax in axes.flat[len(figures):]:
        ax.set_visible(False)

    fig.tight_layout()
    return fig


def plot_julia(
    julia: JuliaApprox,
    ax: Optional[plt.Axes] = None,
    show_boundary: bool = False,
    cmap: str = "magma",
) -> plt.Axes:
    """Draws the escape-time grid in complex-plane coordinates."""
    if ax is None:
        _, ax = plt.subplots()

    x0, y0, x1, y1 = julia.window
    ax.imshow(julia.escape_iter, extent=(x0, x1, y0, y1), origin="upper", cmap=cmap)

    if show_boundary:
        boundary = np.ma.masked_where(~julia.boundary(), np.ones(julia.escape_iter.shape))
        ax.imshow(boundary, extent=(x0, x1, y0, y1), origin="upper", cmap="Greens", vmin=0, vmax=1)

    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(f"{julia.family.value}, delta={julia.spec.delta}")

    return ax
