"""Unit tests for the regression metrics and the parity bands."""

import logging
import math

import numpy as np
import pandas as pd
import pytest
from typeguard import typechecked

from fatigue_automl.lib.constants import MetricRow, TableColumns
from fatigue_automl.lib.errors import EmptyBand, LengthMismatch
from fatigue_automl.lib.evalx.metrics import (
    Metrics,
    band_rows,
    banded_metrics,
    comparison_frame,
    metrics_table,
    parity_frame,
    parity_table,
    regression_metrics,
    try_banded_metrics,
)
from fatigue_automl.lib.utils import to_jsonable


class TestRegressionMetrics:
    """Test regression_metrics."""

    @typechecked
    def test_hand_values(self) -> None:
        """y = [0, 2] against [1, 1]."""
        m = regression_metrics(np.array([0.0, 2.0]), np.array([1.0, 1.0]))
        assert m.n == 2
        assert m.mae == pytest.approx(1.0)
        assert m.mse == pytest.approx(1.0)
        assert m.rmse == pytest.approx(1.0)
        assert m.r2 == pytest.approx(0.0)
        assert m.err_std == pytest.approx(math.sqrt(2.0))

    @typechecked
    def test_perfect(self) -> None:
        """A perfect prediction has R^2 1 and no error."""
        y = np.array([10.0, 20.0, 40.0])
        m = regression_metrics(y, y)
        assert (m.mae, m.rmse, m.r2, m.err_std) == (0.0, 0.0, 1.0, 0.0)

    @pytest.mark.parametrize("yhat, r2", [([5.0, 5.0, 5.0], 1.0), ([4.0, 5.0, 6.0], 0.0)])
    @typechecked
    def test_constant_target(self, yhat: list[float], r2: float) -> None:
        """R^2 of a constant target is 1 for a perfect fit and 0 otherwise."""
        assert regression_metrics(np.full(3, 5.0), np.array(yhat)).r2 == r2

    @typechecked
    def test_length_mismatch(self) -> None:
        """Vectors of different length are rejected."""
        with pytest.raises(LengthMismatch):
            regression_metrics(np.ones(3), np.ones(4))

    @typechecked
    def test_dict_round_trip(self) -> None:
        """Metrics survive their JSON encoding."""
        m = regression_metrics(np.array([1.0, 2.0, 4.0]), np.array([1.5, 2.0, 3.0]))
        assert Metrics.from_dict(to_jsonable(m.to_dict())) == m


class TestBandedMetrics:
    """Test the banded metrics."""

    @typechecked
    def test_closed_band(self) -> None:
        """Band boundaries count as inside."""
        y = np.array([0.0, 100.0, 150.0, 150.1, 300.0])
        assert band_rows(y).tolist() == [True, True, True, False, False]
        m = banded_metrics(y, y + 1.0)
        assert m.n == 3
        assert m.mae == pytest.approx(1.0)

    @typechecked
    def test_empty_band(self, caplog: pytest.LogCaptureFixture) -> None:
        """Fewer than two in-band rows raise EmptyBand, or give None with a warning."""
        y = np.array([100.0, 200.0, 300.0])
        with pytest.raises(EmptyBand):
            banded_metrics(y, y)
        with caplog.at_level(logging.WARNING):
            assert try_banded_metrics(y, y) is None
        assert "lie in [0.0, 150.0] MPa" in caplog.text

    @typechecked
    def test_bad_band(self) -> None:
        """The band needs low < high."""
        with pytest.raises(ValueError):
            band_rows(np.ones(2), (150.0, 0.0))


class TestParity:
    """Test parity_table."""

    @typechecked
    def test_boundary_rows(self) -> None:
        """A residual of exactly 2 sigma is inside the wide band only."""
        y = np.array([10.0, 20.0, 30.0, 40.0])
        yhat = y - np.array([0.0, 0.0, 0.0, 4.0])
        table = parity_table(y, yhat)
        assert table.err_std == pytest.approx(2.0)
        assert table.band_offsets == pytest.approx((3.0, 4.0))
        assert table.counts == (3, 4, 4)
        assert table.inside_narrow.tolist() == [True, True, True, False]

    @typechecked
    def test_frame(self) -> None:
        """The frame keeps the row ids and the residual."""
        y = np.array([10.0, 20.0, 30.0])
        yhat = np.array([11.0, 19.0, 30.0])
        frame = parity_frame(parity_table(y, yhat, row_ids=np.array([7, 3, 9])))
        assert frame[TableColumns.ROW_ID].tolist() == [7, 3, 9]
        assert frame[TableColumns.RESIDUAL].tolist() == [-1.0, 1.0, 0.0]

    @typechecked
    def test_row_id_length(self) -> None:
        """Row ids must match the rows."""
        with pytest.raises(LengthMismatch):
            parity_table(np.ones(3), np.ones(3), row_ids=np.array([1, 2]))


@typechecked
def _table(offset: float, with_band: bool) -> pd.DataFrame:
    y = np.array([20.0, 60.0, 120.0, 400.0])
    m = regression_metrics(y, y + offset)
    band = banded_metrics(y, y + offset) if with_band else None
    return metrics_table(m, m, band, band)


class TestTables:
    """Test metrics_table and comparison_frame."""

    @typechecked
    def test_metrics_table(self) -> None:
        """Six rows in fixed order; band columns NaN without band metrics."""
        table = _table(2.0, with_band=False)
        assert table[TableColumns.METRIC].tolist() == [str(row) for row in MetricRow]
        assert table[TableColumns.BAND].isna().all()
        rmse = table.set_index(TableColumns.METRIC).loc[str(MetricRow.RMSE_TEST)]
        assert rmse[TableColumns.FULL] == pytest.approx(2.0)

    @typechecked
    def test_comparison(self) -> None:
        """Runs sit side by side in the given order."""
        frame = comparison_frame(
            {"a:M1": _table(1.0, with_band=True), "b:M2": _table(3.0, with_band=False)}
        )
        assert list(frame.columns) == [
            TableColumns.METRIC,
            "a:M1 full",
            "a:M1 band",
            "b:M2 full",
            "b:M2 band",
        ]
        mae = frame.set_index(TableColumns.METRIC).loc[str(MetricRow.MAE_TRAIN)]
        assert mae["a:M1 full"] == pytest.approx(1.0)
        assert mae["a:M1 band"] == pytest.approx(1.0)
        assert mae["b:M2 full"] == pytest.approx(3.0)
        assert math.isnan(mae["b:M2 band"])
