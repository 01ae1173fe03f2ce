"""Unit tests for ingestion, the feature schema, EDA summaries and the split."""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from typeguard import typechecked

from fatigue_automl.lib.constants import ColumnKind, Columns, TableColumns
from fatigue_automl.lib.errors import MissingColumn, ParseError, SchemaMismatch
from fatigue_automl.lib.tabular.dataset import ABSENT, Dataset
from fatigue_automl.lib.tabular.eda import (
    eda_summary,
    histogram_frame,
    missingness_frame,
    real_correlation,
    stats_frame,
)
from fatigue_automl.lib.tabular.feature_schema import (
    default_schema,
    load_schema,
    save_schema,
)
from fatigue_automl.lib.tabular.ingest import load_csv, violations_frame
from fatigue_automl.lib.tabular.split import (
    load_split,
    save_split,
    split_positions,
    train_test_split,
)
from tests.unit.utils import toy_dataset


@typechecked
def _write(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, na_rep="", encoding="utf-8")
    return path


class TestLoadCsv:
    """Test load_csv."""

    @typechecked
    def test_reads_every_row(self, synthetic_csv: Path, synthetic_ds: Dataset) -> None:
        """Rows, row ids and the target come back as written."""
        ds = load_csv(synthetic_csv, default_schema())
        assert ds.n_rows == synthetic_ds.n_rows
        np.testing.assert_array_equal(ds.row_ids, np.arange(ds.n_rows))
        np.testing.assert_allclose(
            ds.observed(Columns.FATIGUE_STRENGTH),
            synthetic_ds.observed(Columns.FATIGUE_STRENGTH),
        )
        assert not ds.violations

    @typechecked
    def test_empty_cell_is_masked(self, synthetic_csv: Path, tmp_path: Path) -> None:
        """An empty f_T cell reads as missing at that cell only."""
        frame = pd.read_csv(synthetic_csv, dtype=str, keep_default_na=False)
        frame.loc[1, Columns.FREQUENCY] = ""
        ds = load_csv(_write(frame, tmp_path / "gap.csv"), default_schema())
        mask = ds.mask(Columns.FREQUENCY)
        assert mask[1]
        assert mask.sum() == 1
        assert ds.value(1, Columns.FREQUENCY) is ABSENT

    @pytest.mark.parametrize("token", ["NA", "NaN", "-", "  "])
    @typechecked
    def test_missing_tokens(self, token: str, synthetic_csv: Path, tmp_path: Path) -> None:
        """Each missing token masks the cell."""
        frame = pd.read_csv(synthetic_csv, dtype=str, keep_default_na=False)
        frame.loc[0, Columns.YIELD_STRENGTH] = token
        ds = load_csv(_write(frame, tmp_path / "token.csv"), default_schema())
        assert ds.mask(Columns.YIELD_STRENGTH)[0]

    @typechecked
    def test_missing_required_column(self, synthetic_csv: Path, tmp_path: Path) -> None:
        """A header without t_S raises MissingColumn naming it."""
        frame = pd.read_csv(synthetic_csv, dtype=str, keep_default_na=False)
        path = _write(frame.drop(columns=[Columns.STIFFENER_THICKNESS]), tmp_path / "x.csv")
        with pytest.raises(MissingColumn) as excinfo:
            load_csv(path, default_schema())
        assert excinfo.value.name == Columns.STIFFENER_THICKNESS

    @typechecked
    def test_missing_optional_column(self, synthetic_csv: Path, tmp_path: Path) -> None:
        """An absent optional column reads as fully missing."""
        frame = pd.read_csv(synthetic_csv, dtype=str, keep_default_na=False)
        path = _write(frame.drop(columns=[Columns.WELD_POSITION]), tmp_path / "x.csv")
        ds = load_csv(path, default_schema())
        assert ds.n_missing(Columns.WELD_POSITION) == ds.n_rows

    @typechecked
    def test_out_of_range_is_recorded(
        self, synthetic_csv: Path, tmp_path: Path, caplog: pytest.LogCaptureFixture
    ) -> None:
        """R_eH = 2000 against [235, 1125] is kept and reported."""
        frame = pd.read_csv(synthetic_csv, dtype=str, keep_default_na=False)
        frame.loc[2, Columns.YIELD_STRENGTH] = "2000"
        with caplog.at_level(logging.WARNING):
            ds = load_csv(_write(frame, tmp_path / "range.csv"), default_schema())
        assert "outside their range" in caplog.text
        assert len(ds.violations) == 1
        violation = ds.violations[0]
        assert (violation.row, violation.column) == (2, Columns.YIELD_STRENGTH)
        assert float(violation.value) == 2000.0
        assert ds.value(2, Columns.YIELD_STRENGTH) == 2000.0

        table = violations_frame(ds.violations)
        assert table[TableColumns.COLUMN].tolist() == [Columns.YIELD_STRENGTH]

    @typechecked
    def test_unknown_level_is_masked(self, synthetic_csv: Path, tmp_path: Path) -> None:
        """A level outside the level set is reported and read as missing."""
        frame = pd.read_csv(synthetic_csv, dtype=str, keep_default_na=False)
        frame.loc[4, Columns.WELD_TYPE] = "spot"
        ds = load_csv(_write(frame, tmp_path / "level.csv"), default_schema())
        assert [(v.row, v.column) for v in ds.violations] == [(4, Columns.WELD_TYPE)]
        assert ds.mask(Columns.WELD_TYPE)[4]

    @typechecked
    def test_unparsable_real(self, synthetic_csv: Path, tmp_path: Path) -> None:
        """A non-numeric real cell raises ParseError with its coordinates."""
        frame = pd.read_csv(synthetic_csv, dtype=str, keep_default_na=False)
        frame.loc[3, Columns.BASE_PLATE_THICKNESS] = "12,5"
        with pytest.raises(ParseError) as excinfo:
            load_csv(_write(frame, tmp_path / "parse.csv"), default_schema())
        assert (excinfo.value.row, excinfo.value.column) == (3, Columns.BASE_PLATE_THICKNESS)

    @typechecked
    def test_absent_file(self, tmp_path: Path) -> None:
        """An absent file raises FileNotFoundError naming the path."""
        with pytest.raises(FileNotFoundError, match="nowhere.csv"):
            load_csv(tmp_path / "nowhere.csv", default_schema())


@typechecked
def test_schema_file_round_trip(tmp_path: Path) -> None:
    """A saved default schema loads back equal."""
    path = save_schema(default_schema(), tmp_path / "schema.ini")
    loaded = load_schema(path)
    assert loaded.names == default_schema().names
    assert loaded.target_names == default_schema().target_names
    assert loaded.columns == default_schema().columns


@typechecked
def test_dataset_rejects_unknown_level() -> None:
    """from_arrays refuses observed cells outside the level set."""
    schema = default_schema()
    values = {name: [None] for name in schema.names}
    values[Columns.FATIGUE_STRENGTH] = [100.0]
    values[Columns.SCALE] = ["huge"]
    with pytest.raises(SchemaMismatch):
        Dataset.from_arrays(schema=schema, values=values)


class TestEdaSummary:
    """Test eda_summary and its tables."""

    @typechecked
    def test_complete_column(self) -> None:
        """[1, 2, 3] gives mean 2, median 2 and no missing cells."""
        ds = toy_dataset({"a": np.array([1.0, 2.0, 3.0]), "y": np.array([5.0, 6.0, 7.0])})
        summary = eda_summary(ds, bins=3).columns[0]
        assert summary.mean == 2.0
        assert summary.median == 2.0
        assert summary.missing_ratio == 0.0
        assert sum(summary.bin_counts) == 3

    @typechecked
    def test_half_missing_column(self) -> None:
        """Two of four cells missing gives a missing ratio of 0.5."""
        ds = toy_dataset(
            {
                "a": np.array([1.0, np.nan, 3.0, np.nan]),
                "y": np.array([5.0, 6.0, 7.0, 8.0]),
            }
        )
        report = eda_summary(ds, bins=2)
        assert report.columns[0].missing_ratio == 0.5
        frame = missingness_frame(report)
        assert frame[TableColumns.PERCENT].tolist() == [50.0, 0.0]

    @typechecked
    def test_fully_missing_column(self, caplog: pytest.LogCaptureFixture) -> None:
        """A fully missing column is collected as EmptyColumn, with a warning."""
        ds = toy_dataset(
            {"a": np.array([np.nan, np.nan]), "y": np.array([5.0, 6.0])}
        )
        with caplog.at_level(logging.WARNING):
            report = eda_summary(ds, bins=2)
        assert len(report.empty_columns) == 1
        assert "fully missing" in caplog.text
        assert np.isnan(report.columns[0].mean)

    @typechecked
    def test_tables(self, synthetic_ds: Dataset) -> None:
        """Stats and histogram tables cover every column and every observed cell."""
        report = eda_summary(synthetic_ds, bins=7)
        stats = stats_frame(report)
        assert stats[TableColumns.COLUMN].tolist() == synthetic_ds.names
        kinds = dict(zip(stats[TableColumns.COLUMN], stats[TableColumns.KIND]))
        assert kinds[Columns.POST_TREAT] == ColumnKind.CATEGORICAL
        for summary in report.columns:
            if summary.kind == ColumnKind.REAL and summary.bin_counts:
                hist = histogram_frame(summary)
                assert len(hist) == 7
                assert hist[TableColumns.COUNT].sum() == summary.n_observed

    @typechecked
    def test_negative_overhang_rows(self) -> None:
        """Rows with l_S > w_BP are listed by row id."""
        ds = toy_dataset(
            {
                Columns.BASE_PLATE_WIDTH: np.array([100.0, 30.0, 40.0]),
                Columns.STIFFENER_LENGTH: np.array([40.0, 40.0, 40.0]),
                "y": np.array([1.0, 2.0, 3.0]),
            }
        )
        assert eda_summary(ds, bins=2).negative_overhang_rows == (1,)


@typechecked
def test_real_correlation() -> None:
    """Exactly proportional columns correlate at 1, anti-proportional at -1."""
    rng = np.random.default_rng(0)
    x = rng.normal(size=50)
    ds = toy_dataset({"a": x, "b": -3.0 * x, "c": 2.0 * x + 1.0, "y": rng.uniform(1, 9, 50)})
    result = real_correlation(ds)
    assert result is not None
    matrix = result.to_frame()
    assert matrix.loc["a", "c"] == pytest.approx(1.0)
    assert matrix.loc["a", "b"] == pytest.approx(-1.0)


class TestSplit:
    """Test the fixed train/test split."""

    @typechecked
    def test_sizes(self) -> None:
        """n = 100 at fraction 0.1 gives 90 train and 10 test rows."""
        train, test = split_positions(n_rows=100, test_fraction=0.1, seed=0)
        assert (len(train), len(test)) == (90, 10)
        assert set(train).isdisjoint(test)
        assert set(train) | set(test) == set(range(100))

    @pytest.mark.parametrize(
        "n_rows, fraction, n_test", [(150, 0.1, 15), (151, 0.1, 16), (30, 0.3, 9)]
    )
    @typechecked
    def test_test_rows_round_up(self, n_rows: int, fraction: float, n_test: int) -> None:
        """The test partition holds ceil(n * fraction) rows."""
        test_rows = split_positions(n_rows=n_rows, test_fraction=fraction, seed=0)[1]
        assert len(test_rows) == n_test

    @typechecked
    def test_same_seed_same_split(self) -> None:
        """The same seed twice gives the same partition."""
        first = split_positions(n_rows=100, test_fraction=0.1, seed=7)
        second = split_positions(n_rows=100, test_fraction=0.1, seed=7)
        np.testing.assert_array_equal(first[1], second[1])

    @typechecked
    def test_seeds_differ(self) -> None:
        """Twenty seeds give more than one partition of ten rows."""
        partitions = {
            tuple(split_positions(n_rows=10, test_fraction=0.5, seed=seed)[1])
            for seed in range(20)
        }
        assert len(partitions) >= 2

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1])
    @typechecked
    def test_bad_fraction(self, fraction: float) -> None:
        """Fractions outside (0, 1) raise."""
        with pytest.raises(ValueError, match="test_fraction"):
            split_positions(n_rows=10, test_fraction=fraction, seed=0)

    @typechecked
    def test_saved_split_reloads(self, synthetic_ds: Dataset, tmp_path: Path) -> None:
        """A saved split re-applies to the same dataset by row id."""
        train, test = train_test_split(synthetic_ds, 0.2, seed=5)
        path = save_split(train, test, tmp_path / "split.json")
        train_again, test_again = load_split(synthetic_ds, path)
        np.testing.assert_array_equal(train.row_ids, train_again.row_ids)
        np.testing.assert_array_equal(test.row_ids, test_again.row_ids)
