"""Regression metrics, banded evaluation and parity bands, in MPa."""

import logging
import math
from collections.abc import Mapping
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd
import pandera.pandas as pa
from pandera.typing import DataFrame
from typeguard import typechecked

from fatigue_automl.lib.constants import (
    DEFAULT_BAND,
    PARITY_BAND_FACTORS,
    MetricRow,
    TableColumns,
)
from fatigue_automl.lib.errors import EmptyBand, LengthMismatch
from fatigue_automl.lib.schema import MetricsTable, ParityRows
from fatigue_automl.lib.schema.utils import schema_error_handler
from fatigue_automl.lib.utils import from_json_float

logger = logging.getLogger(__name__)

# Relative slack of the closed band boundaries.
_BAND_TOL = 1e-12


@dataclass(frozen=True)
class Metrics:
    """Error summary of one prediction vector.

    `err_std` is the sample standard deviation (n - 1) of the residuals y - yhat.
    """

    n: int
    mae: float
    mse: float
    rmse: float
    r2: float
    err_std: float

    def to_dict(self) -> dict[str, float]:
        """Plain dict."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Metrics":
        """Inverse of `to_dict`, reading the JSON encoding of non-finite floats."""
        return cls(
            n=int(data["n"]),
            **{
                key: from_json_float(data[key])
                for key in ("mae", "mse", "rmse", "r2", "err_std")
            },
        )


def _check_pair(y: np.ndarray, yhat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    if len(y) != len(yhat):
        raise LengthMismatch(f"{len(y)} actual values against {len(yhat)} predictions.")
    if not (np.isfinite(y).all() and np.isfinite(yhat).all()):
        raise ValueError("Actual and predicted values must be finite.")
    return y, yhat


@typechecked
def regression_metrics(y: np.ndarray, yhat: np.ndarray) -> Metrics:
    """MAE, MSE, RMSE, R^2 and the residual standard deviation.

    R^2 of a constant target is 1 for a perfect fit and 0 otherwise.

    Raises:
        LengthMismatch: If the vectors differ in length.
    """
    y, yhat = _check_pair(y, yhat)
    if len(y) < 2:
        raise ValueError(f"regression_metrics needs at least 2 rows. Got {len(y)}.")
    residual = y - yhat
    mse = float(np.mean(residual**2))
    ss_res = float(np.sum(residual**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot > 0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res == 0 else 0.0
    return Metrics(
        n=len(y),
        mae=float(np.mean(np.abs(residual))),
        mse=mse,
        rmse=math.sqrt(mse),
        r2=r2,
        err_std=float(np.std(residual, ddof=1)),
    )


@typechecked
def band_rows(y: np.ndarray, band: tuple[float, float] = DEFAULT_BAND) -> np.ndarray:
    """Mask of actual values in the closed band [low, high]."""
    low, high = band
    if not low < high:
        raise ValueError(f"Band low must be below high. Got {band}.")
    y = np.asarray(y, dtype=np.float64)
    return (y >= low) & (y <= high)


@typechecked
def banded_metrics(
    y: np.ndarray, yhat: np.ndarray, band: tuple[float, float] = DEFAULT_BAND
) -> Metrics:
    """Metrics on the rows whose actual value lies in the closed band.

    Raises:
        EmptyBand: If fewer than two actual values fall in the band.
    """
    y, yhat = _check_pair(y, yhat)
    inside = band_rows(y, band)
    if inside.sum() < 2:
        raise EmptyBand(
            f"{int(inside.sum())} of {len(y)} actual values lie in "
            f"[{band[0]}, {band[1]}] MPa."
        )
    return regression_metrics(y[inside], yhat[inside])


@dataclass(frozen=True)
class ParityTable:
    """Actual against predicted values with closed +-1.5 and +-2 sigma_E band membership."""

    row_ids: np.ndarray
    actual: np.ndarray
    predicted: np.ndarray
    err_std: float
    inside_narrow: np.ndarray
    inside_wide: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        """y - yhat."""
        return self.actual - self.predicted

    @property
    def band_offsets(self) -> tuple[float, float]:
        """Half-widths of the two bands."""
        narrow, wide = PARITY_BAND_FACTORS
        return narrow * self.err_std, wide * self.err_std

    @property
    def counts(self) -> tuple[int, int, int]:
        """Rows inside the narrow band, inside the wide band, and in total."""
        return int(self.inside_narrow.sum()), int(self.inside_wide.sum()), len(self.actual)


@typechecked
def parity_table(
    y: np.ndarray, yhat: np.ndarray, row_ids: np.ndarray | None = None
) -> ParityTable:
    """Parity rows and band membership. Boundary residuals count as inside.

    Raises:
        LengthMismatch: If the vectors differ in length.
    """
    y, yhat = _check_pair(y, yhat)
    if len(y) < 2:
        raise ValueError(f"parity_table needs at least 2 rows. Got {len(y)}.")
    ids = np.arange(len(y)) if row_ids is None else np.asarray(row_ids, dtype=np.int64)
    if len(ids) != len(y):
        raise LengthMismatch(f"{len(ids)} row ids for {len(y)} rows.")
    err_std = float(np.std(y - yhat, ddof=1))
    magnitude = np.abs(y - yhat)
    narrow, wide = (
        factor * err_std * (1.0 + _BAND_TOL) for factor in PARITY_BAND_FACTORS
    )
    return ParityTable(
        row_ids=ids,
        actual=y,
        predicted=yhat,
        err_std=err_std,
        inside_narrow=magnitude <= narrow,
        inside_wide=magnitude <= wide,
    )


@schema_error_handler
@pa.check_types(lazy=True)
def parity_frame(table: ParityTable) -> DataFrame[ParityRows]:
    """A parity table as rows."""
    return pd.DataFrame(
        {
            TableColumns.ROW_ID: table.row_ids,
            TableColumns.ACTUAL: table.actual,
            TableColumns.PREDICTED: table.predicted,
            TableColumns.RESIDUAL: table.residual,
            TableColumns.INSIDE_NARROW: table.inside_narrow,
            TableColumns.INSIDE_WIDE: table.inside_wide,
        }
    )


@schema_error_handler
@pa.check_types(lazy=True)
def metrics_table(
    train: Metrics,
    test: Metrics,
    train_band: Metrics | None = None,
    test_band: Metrics | None = None,
) -> DataFrame[MetricsTable]:
    """R^2, RMSE and MAE on train and test, for the full range and the band.

    Band columns are NaN when the band held too few rows.
    """

    def band(metrics: Metrics | None, field: str) -> float:
        return math.nan if metrics is None else getattr(metrics, field)

    rows = [
        (MetricRow.R2_TRAIN, train.r2, band(train_band, "r2")),
        (MetricRow.R2_TEST, test.r2, band(test_band, "r2")),
        (MetricRow.RMSE_TRAIN, train.rmse, band(train_band, "rmse")),
        (MetricRow.RMSE_TEST, test.rmse, band(test_band, "rmse")),
        (MetricRow.MAE_TRAIN, train.mae, band(train_band, "mae")),
        (MetricRow.MAE_TEST, test.mae, band(test_band, "mae")),
    ]
    return pd.DataFrame(
        [
            {
                TableColumns.METRIC: str(name),
                TableColumns.FULL: full,
                TableColumns.BAND: value,
            }
            for name, full, value in rows
        ]
    )


@typechecked
def try_banded_metrics(
    y: np.ndarray, yhat: np.ndarray, band: tuple[float, float] = DEFAULT_BAND
) -> Metrics | None:
    """`banded_metrics`, or None with a warning when the band is empty."""
    try:
        return banded_metrics(y, yhat, band)
    except EmptyBand as e:
        logger.warning(str(e))
        return None


@typechecked
def comparison_frame(tables: Mapping[str, pd.DataFrame]) -> pd.DataFrame:
    """Metric tables of several runs side by side.

    Args:
        tables: `metrics_table` outputs keyed by run label, in column order.

    Returns:
        One row per metric; a "<label> full" and a "<label> band" column per run.
    """
    metrics = [str(row) for row in MetricRow]
    frame = pd.DataFrame({TableColumns.METRIC: metrics})
    for label, table in tables.items():
        indexed = table.set_index(TableColumns.METRIC)
        for column in (TableColumns.FULL, TableColumns.BAND):
            frame[f"{label} {column}"] = indexed.loc[metrics, column].to_numpy(dtype=float)
    return frame
