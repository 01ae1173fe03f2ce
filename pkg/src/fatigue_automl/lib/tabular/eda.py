"""Exploratory summary of a dataset."""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
import pandera.pandas as pa
from pandera.typing import DataFrame
from typeguard import typechecked

from fatigue_automl.lib.constants import ColumnKind, Columns, TableColumns
from fatigue_automl.lib.errors import EmptyColumn
from fatigue_automl.lib.features.correlation import CorrelationResult, correlation_matrix
from fatigue_automl.lib.schema import EdaStats, Histogram, Missingness
from fatigue_automl.lib.schema.utils import schema_error_handler
from fatigue_automl.lib.tabular.dataset import Dataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ColumnSummary:
    """Summary of one column over its observed cells.

    Real statistics are NaN for non-real or fully missing columns. `std` is the sample
    standard deviation (NaN below two observations).
    """

    name: str
    kind: ColumnKind
    n_rows: int
    n_missing: int
    minimum: float = np.nan
    maximum: float = np.nan
    mean: float = np.nan
    median: float = np.nan
    std: float = np.nan
    level_counts: tuple[tuple[str, int], ...] = ()
    bin_edges: tuple[float, ...] = ()
    bin_counts: tuple[int, ...] = ()

    @property
    def missing_ratio(self) -> float:
        """Missing cells over rows."""
        return self.n_missing / self.n_rows if self.n_rows else 0.0

    @property
    def n_observed(self) -> int:
        """Observed cell count."""
        return self.n_rows - self.n_missing


@dataclass(frozen=True)
class EdaReport:
    """Per-column summaries plus the fully missing columns."""

    columns: tuple[ColumnSummary, ...]
    empty_columns: tuple[EmptyColumn, ...]
    negative_overhang_rows: tuple[int, ...] = ()


@typechecked
def eda_summary(ds: Dataset, bins: int) -> EdaReport:
    """Summarize every column of a dataset over its observed cells.

    Args:
        ds: The dataset.
        bins: Histogram bins per real column.

    Returns:
        The EdaReport. Fully missing columns are reported in `empty_columns`.
    """
    if bins < 1:
        raise ValueError(f"bins must be at least 1. Got {bins}.")

    summaries = []
    empty = []
    for spec in ds.schema.columns:
        observed = ds.observed(spec.name)
        n_missing = ds.n_missing(spec.name)
        if len(observed) == 0:
            empty.append(EmptyColumn(f"Column {spec.name} is fully missing."))
            summaries.append(
                ColumnSummary(
                    name=spec.name, kind=spec.kind, n_rows=ds.n_rows, n_missing=n_missing
                )
            )
            continue

        if spec.kind == ColumnKind.REAL:
            values = observed.astype(float)
            counts, edges = np.histogram(values, bins=bins)
            summaries.append(
                ColumnSummary(
                    name=spec.name,
                    kind=spec.kind,
                    n_rows=ds.n_rows,
                    n_missing=n_missing,
                    minimum=float(values.min()),
                    maximum=float(values.max()),
                    mean=float(values.mean()),
                    median=float(np.median(values)),
                    std=float(values.std(ddof=1)) if len(values) > 1 else np.nan,
                    bin_edges=tuple(float(edge) for edge in edges),
                    bin_counts=tuple(int(count) for count in counts),
                )
            )
        else:
            level_counts = tuple(
                (level, int((observed == level).sum())) for level in spec.levels or ()
            )
            summaries.append(
                ColumnSummary(
                    name=spec.name,
                    kind=spec.kind,
                    n_rows=ds.n_rows,
                    n_missing=n_missing,
                    level_counts=level_counts,
                )
            )

    for error in empty:
        logger.warning(str(error))

    return EdaReport(
        columns=tuple(summaries),
        empty_columns=tuple(empty),
        negative_overhang_rows=_negative_overhang_rows(ds),
    )


def _negative_overhang_rows(ds: Dataset) -> tuple[int, ...]:
    if Columns.BASE_PLATE_WIDTH not in ds or Columns.STIFFENER_LENGTH not in ds:
        return ()
    width = ds.column(Columns.BASE_PLATE_WIDTH)
    length = ds.column(Columns.STIFFENER_LENGTH)
    negative = np.ma.filled((width - length) < 0, False)
    return tuple(int(row_id) for row_id in ds.row_ids[negative])


@schema_error_handler
@pa.check_types(lazy=True)
def missingness_frame(report: EdaReport) -> DataFrame[Missingness]:
    """Missing percentage per column."""
    return pd.DataFrame(
        {
            TableColumns.COLUMN: [col.name for col in report.columns],
            TableColumns.PERCENT: [100.0 * col.missing_ratio for col in report.columns],
        }
    )


@schema_error_handler
@pa.check_types(lazy=True)
def stats_frame(report: EdaReport) -> DataFrame[EdaStats]:
    """Descriptive statistics per column."""
    rows = []
    for col in report.columns:
        rows.append(
            {
                TableColumns.COLUMN: col.name,
                TableColumns.KIND: str(col.kind),
                TableColumns.COUNT: col.n_observed,
                TableColumns.MISSING: col.n_missing,
                TableColumns.MISSING_RATIO: col.missing_ratio,
                TableColumns.MIN: col.minimum,
                TableColumns.MAX: col.maximum,
                TableColumns.MEAN: col.mean,
                TableColumns.MEDIAN: col.median,
                TableColumns.STD: col.std,
                TableColumns.LEVELS: ";".join(
                    f"{level}:{count}" for level, count in col.level_counts
                ),
            }
        )
    return pd.DataFrame(rows)


@schema_error_handler
@pa.check_types(lazy=True)
def histogram_frame(summary: ColumnSummary) -> DataFrame[Histogram]:
    """Histogram bins of one real column."""
    edges = summary.bin_edges
    return pd.DataFrame(
        {
            TableColumns.BIN_LOW: list(edges[:-1]),
            TableColumns.BIN_HIGH: list(edges[1:]),
            TableColumns.COUNT: list(summary.bin_counts),
        }
    )


@typechecked
def real_correlation(ds: Dataset) -> CorrelationResult | None:
    """Pearson correlation of the real columns over the rows where all are observed.

    Fully missing columns are left out. None, with a warning, below two complete rows.
    """
    names = [
        spec.name
        for spec in ds.schema.columns
        if spec.kind == ColumnKind.REAL and ds.n_missing(spec.name) < ds.n_rows
    ]
    if not names:
        logger.warning("No observed real columns to correlate.")
        return None
    complete = ~np.any([ds.mask(name) for name in names], axis=0)
    if complete.sum() < 2:
        logger.warning(
            f"Only {int(complete.sum())} rows have every real column observed; "
            "skipping the correlation matrix."
        )
        return None
    X = np.column_stack(
        [np.ma.filled(ds.column(name).astype(float), np.nan)[complete] for name in names]
    )
    return correlation_matrix(X, names)
