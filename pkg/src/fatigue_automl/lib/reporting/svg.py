"""Static SVG figures rendered from already-serialized tables.

Figures are built on `matplotlib.figure.Figure` directly (no pyplot state) and saved with
a fixed hash salt and no date, so the same table always renders the same bytes.
"""

import logging
from collections.abc import Mapping, Sequence
from pathlib import Path

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.figure import Figure
from typeguard import typechecked

from fatigue_automl.lib.constants import PARITY_BAND_FACTORS, SVG_HASH_SALT, TableColumns
from fatigue_automl.lib.evalx.metrics import ParityTable
from fatigue_automl.lib.utils import derive_rng

logger = logging.getLogger(__name__)

_RC = {"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none", "path.simplify": False}
_FIGSIZE = (6.4, 4.8)


def band_gid(factor: float, side: str) -> str:
    """SVG id of one dashed parity band line, e.g. "parity_band_1.5_upper"."""
    return f"parity_band_{factor:g}_{side}"


@typechecked
def save_svg(fig: Figure, path: Path) -> Path:
    """Write a figure as deterministic SVG."""
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


@typechecked
def parity_figure(table: ParityTable, title: str) -> Figure:
    """Predicted against actual values, with dashed +-1.5 and +-2 sigma_E band pairs."""
    fig = Figure(figsize=(5.6, 5.6))
    ax = fig.add_subplot()
    ax.scatter(table.actual, table.predicted, s=10, alpha=0.7)
    low = float(min(table.actual.min(), table.predicted.min()))
    high = float(max(table.actual.max(), table.predicted.max()))
    line = np.array([low, high])
    ax.plot(line, line, color="black", linewidth=1.0, gid="parity_identity")
    for factor, offset, color in zip(PARITY_BAND_FACTORS, table.band_offsets, ("C1", "C3")):
        label = f"+-{factor:g} sigma"
        ax.plot(
            line, line + offset, "--", color=color, label=label, gid=band_gid(factor, "upper")
        )
        ax.plot(line, line - offset, "--", color=color, gid=band_gid(factor, "lower"))
    narrow, wide, total = table.counts
    ax.set_title(f"{title}: {narrow}/{total} inside 1.5 sigma, {wide}/{total} inside 2 sigma")
    ax.set_xlabel("Actual [MPa]")
    ax.set_ylabel("Predicted [MPa]")
    ax.legend(loc="upper left")
    return fig


@typechecked
def importance_figure(frame: pd.DataFrame, value_column: str, title: str) -> Figure:
    """Horizontal bars of a ranked importance table, top rank on top."""
    fig = Figure(figsize=(6.4, max(2.4, 0.3 * len(frame) + 1.0)))
    ax = fig.add_subplot()
    positions = np.arange(len(frame))[::-1]
    ax.barh(positions, frame[value_column].to_numpy())
    ax.set_yticks(positions, frame[TableColumns.FEATURE].tolist())
    ax.set_xlabel(value_column)
    ax.set_title(title)
    fig.tight_layout()
    return fig


@typechecked
def beeswarm_figure(frame: pd.DataFrame, order: Sequence[str], seed: int = 0) -> Figure:
    """SHAP value per point and feature, colored by normalized feature value.

    Features are drawn in `order`, the first on top. Vertical jitter is seeded.
    """
    fig = Figure(figsize=(6.4, max(2.4, 0.35 * len(order) + 1.0)))
    ax = fig.add_subplot()
    rng = derive_rng(seed, "beeswarm")
    points = None
    for position, feature in zip(range(len(order) - 1, -1, -1), order):
        rows = frame[frame[TableColumns.FEATURE] == feature]
        jitter = rng.uniform(-0.3, 0.3, size=len(rows))
        points = ax.scatter(
            rows[TableColumns.SHAP_VALUE],
            position + jitter,
            c=rows[TableColumns.NORMALIZED_VALUE],
            cmap="coolwarm",
            vmin=0.0,
            vmax=1.0,
            s=6,
        )
    ax.set_yticks(range(len(order) - 1, -1, -1), list(order))
    ax.axvline(0.0, color="grey", linewidth=0.8)
    ax.set_xlabel("SHAP value")
    if points is not None:
        fig.colorbar(points, ax=ax, label="Feature value (normalized)")
    fig.tight_layout()
    return fig


@typechecked
def rmse_boxplot_figure(rmse_by_family: Mapping[str, Sequence[float]]) -> Figure:
    """Distribution of mean CV RMSE over the trials of each family."""
    fig = Figure(figsize=_FIGSIZE)
    ax = fig.add_subplot()
    families = sorted(rmse_by_family)
    ax.boxplot([list(rmse_by_family[family]) for family in families])
    ax.set_xticks(range(1, len(families) + 1), families, rotation=30, ha="right")
    ax.set_ylabel("Mean CV RMSE")
    fig.tight_layout()
    return fig


@typechecked
def learning_curve_figure(frame: pd.DataFrame, title: str) -> Figure:
    """Training and validation RMSE per iteration, with the best iteration marked."""
    fig = Figure(figsize=_FIGSIZE)
    ax = fig.add_subplot()
    iterations = frame[TableColumns.ITERATION]
    ax.plot(iterations, frame[TableColumns.TRAIN_METRIC], label="train")
    valid = frame[TableColumns.VALID_METRIC]
    if valid.notna().any():
        ax.plot(iterations, valid, label="validation")
    if len(frame):
        ax.axvline(int(frame[TableColumns.BEST_ITERATION].iloc[0]), color="grey", ls=":")
    ax.set_xlabel("Iteration")
    ax.set_ylabel("RMSE")
    ax.set_title(title)
    ax.legend()
    return fig
