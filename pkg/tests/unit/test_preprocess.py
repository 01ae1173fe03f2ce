"""Unit tests for the Yeo-Johnson transform and the preprocessing pipeline."""

import logging
import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from typeguard import typechecked

from fatigue_automl.lib.constants import (
    ColumnKind,
    Columns,
    ImputeStrategy,
    PostTreatment,
    TransformDirection,
    WeldType,
)
from fatigue_automl.lib.errors import ConfigError, DegenerateInput, SchemaMismatch
from fatigue_automl.lib.preprocess.pipeline import (
    ImputeSpec,
    apply_pipeline,
    encode_features,
    fit_pipeline,
    inverse_target,
    load_pipeline,
    save_pipeline,
    transform_target,
)
from fatigue_automl.lib.preprocess.power import (
    yj_fit_lambda,
    yj_log_likelihood,
    yj_transform,
)
from fatigue_automl.lib.synth.generator import SynthConfig, generate_synthetic
from fatigue_automl.lib.tabular.dataset import Dataset
from fatigue_automl.lib.tabular.feature_schema import ColumnSpec, FeatureSchema
from fatigue_automl.lib.tabular.split import split_positions, train_test_split

FORWARD = TransformDirection.FORWARD
INVERSE = TransformDirection.INVERSE


@pytest.fixture(scope="module")
@typechecked
def gappy_ds() -> Dataset:
    """Synthetic rows with missing strengths and treatments."""
    return generate_synthetic(
        SynthConfig(
            n_rows=80,
            seed=1,
            missing_rates={Columns.YIELD_STRENGTH: 0.25, Columns.POST_TREAT: 0.1},
        )
    )


@typechecked
def _grid_lambda(values: np.ndarray) -> float:
    grid = np.arange(-5.0, 5.0 + 1e-9, 0.01)
    return float(grid[np.argmax([yj_log_likelihood(values, float(lm)) for lm in grid])])


class TestYjTransform:
    """Test yj_transform."""

    @pytest.mark.parametrize("lmbda", [-2.0, 0.0, 0.5, 1.0, 2.0, 3.0])
    @typechecked
    def test_zero_is_fixed(self, lmbda: float) -> None:
        """x = 0 maps to 0 for every lambda."""
        assert yj_transform(np.array([0.0]), lmbda, FORWARD)[0] == 0.0

    @typechecked
    def test_lambda_one_is_identity(self) -> None:
        """Lambda 1 leaves values unchanged."""
        x = np.array([-3.5, -1.0, 0.0, 2.5, 40.0])
        np.testing.assert_allclose(yj_transform(x, 1.0, FORWARD), x, atol=1e-12)

    @typechecked
    def test_lambda_zero_is_log1p(self) -> None:
        """Lambda 0 maps e - 1 to 1."""
        assert yj_transform(np.array([math.e - 1]), 0.0, FORWARD)[0] == pytest.approx(1.0)

    @typechecked
    def test_inverse_undoes_forward(self) -> None:
        """inverse(forward(x)) = x over a lambda by x grid."""
        x = np.linspace(-100.0, 100.0, 41)
        for lmbda in np.linspace(-5.0, 5.0, 21):
            back = yj_transform(yj_transform(x, float(lmbda), FORWARD), float(lmbda), INVERSE)
            np.testing.assert_allclose(back, x, rtol=1e-5, atol=1e-9)

    @typechecked
    def test_inverse_clips_outside_image(self, caplog: pytest.LogCaptureFixture) -> None:
        """Inverse inputs beyond the image are clipped with a warning."""
        with caplog.at_level(logging.WARNING):
            out = yj_transform(np.array([10.0]), -1.0, INVERSE)
        assert np.isfinite(out).all()
        assert "outside the Yeo-Johnson image" in caplog.text


class TestYjFitLambda:
    """Test yj_fit_lambda."""

    @typechecked
    def test_normal_sample(self) -> None:
        """A standard normal sample fits lambda near 1, matching a grid scan."""
        values = np.random.default_rng(11).normal(size=10000)
        lmbda = yj_fit_lambda(values)
        assert 0.8 <= lmbda <= 1.2
        assert 0.8 <= _grid_lambda(values) <= 1.2

    @typechecked
    def test_right_skewed_sample(self) -> None:
        """A log-normal sample fits lambda below 1, as the grid scan does."""
        values = np.exp(np.random.default_rng(12).normal(size=2000)) - 1.0
        lmbda = yj_fit_lambda(values)
        assert lmbda < 1.0
        assert abs(lmbda - _grid_lambda(values)) <= 0.02

    @typechecked
    def test_constant(self) -> None:
        """A constant vector raises DegenerateInput."""
        with pytest.raises(DegenerateInput):
            yj_fit_lambda(np.full(10, 3.0))


class TestFitPipeline:
    """Test fit_pipeline and its imputers."""

    @typechecked
    def test_random_sample_pool(self, gappy_ds: Dataset) -> None:
        """The random_sample pool is the sorted observed training values."""
        p = fit_pipeline(
            gappy_ds,
            impute_specs=[ImputeSpec(Columns.YIELD_STRENGTH, ImputeStrategy.RANDOM_SAMPLE)],
            target=Columns.FATIGUE_STRENGTH,
            seed=0,
        )
        pool = p.imputers[Columns.YIELD_STRENGTH].pool
        assert list(pool) == sorted(gappy_ds.observed(Columns.YIELD_STRENGTH).tolist())

    @pytest.mark.parametrize(
        "column, level",
        [(Columns.POST_TREAT, PostTreatment.AS_WELDED), (Columns.WELD_TYPE, WeldType.FILLET)],
    )
    @typechecked
    def test_constant_level(self, gappy_ds: Dataset, column: str, level: str) -> None:
        """A constant imputer stores the literal level."""
        p = fit_pipeline(
            gappy_ds,
            impute_specs=[ImputeSpec.parse(column, f"constant:{level}")],
            target=Columns.FATIGUE_STRENGTH,
            seed=0,
        )
        assert p.imputers[column].fill == level

    @typechecked
    def test_constant_must_be_a_level(self, gappy_ds: Dataset) -> None:
        """A constant outside the level set is a config error."""
        with pytest.raises(ConfigError):
            fit_pipeline(
                gappy_ds,
                impute_specs=[ImputeSpec.parse(Columns.WELD_TYPE, "constant:spot")],
                target=Columns.FATIGUE_STRENGTH,
                seed=0,
            )

    @typechecked
    def test_unknown_strategy(self) -> None:
        """An unknown strategy name is a config error."""
        with pytest.raises(ConfigError):
            ImputeSpec.parse(Columns.YIELD_STRENGTH, "mode")

    @typechecked
    def test_output_has_no_missing_cells(self, gappy_ds: Dataset) -> None:
        """Applying the pipeline to its training rows leaves no missing cell."""
        p = fit_pipeline(gappy_ds, impute_specs=[], target=Columns.FATIGUE_STRENGTH, seed=0)
        X, y, names = apply_pipeline(p, gappy_ds, seed=0)
        assert np.isfinite(X).all()
        assert np.isfinite(y).all()
        assert names == list(p.feature_names)
        np.testing.assert_allclose(X.mean(axis=0), 0.0, atol=1e-9)

    @typechecked
    def test_draws_depend_on_row_id(self, gappy_ds: Dataset) -> None:
        """Random fills for a row are the same alone or among other rows."""
        p = fit_pipeline(gappy_ds, impute_specs=[], target=Columns.FATIGUE_STRENGTH, seed=4)
        full, names = encode_features(p, gappy_ds, seed=4)
        rows = np.flatnonzero(gappy_ds.mask(Columns.YIELD_STRENGTH))[:3]
        part, _ = encode_features(p, gappy_ds.take(rows), seed=4)
        column = names.index(Columns.YIELD_STRENGTH)
        np.testing.assert_array_equal(full[rows, column], part[:, column])

    @typechecked
    def test_one_hot_unseen_level(self) -> None:
        """Three training levels give three indicators; an unseen level sets none."""
        schema = FeatureSchema(
            columns=(
                ColumnSpec("c", ColumnKind.CATEGORICAL, levels=("p", "q", "r", "s")),
                ColumnSpec("x", ColumnKind.REAL, unit="mm"),
                ColumnSpec("y", ColumnKind.REAL, unit="MPa"),
            ),
            target_names=("y",),
        )
        train = Dataset.from_arrays(
            schema,
            {
                "c": ["p", "q", "r", "p", "q", "r"],
                "x": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                "y": [10.0, 20.0, 30.0, 15.0, 25.0, 35.0],
            },
        )
        test = Dataset.from_arrays(schema, {"c": ["s"], "x": [2.0], "y": [12.0]})
        p = fit_pipeline(train, impute_specs=[], target="y", seed=0)
        raw, names = encode_features(p, test, seed=0)
        assert names == ["c=p", "c=q", "c=r", "x"]
        np.testing.assert_array_equal(raw[0, :3], [0.0, 0.0, 0.0])

    @typechecked
    def test_missing_column(self, gappy_ds: Dataset) -> None:
        """A dataset without a pipeline column is rejected."""
        p = fit_pipeline(gappy_ds, impute_specs=[], target=Columns.FATIGUE_STRENGTH, seed=0)
        with pytest.raises(SchemaMismatch):
            encode_features(p, gappy_ds.drop_columns([Columns.STIFFENER_HEIGHT]), seed=0)


class TestTargetTransform:
    """Test transform_target and inverse_target."""

    @typechecked
    def test_hand_values(self, gappy_ds: Dataset) -> None:
        """With lambda 1, mean 2 and std 1, 100 MPa maps to 0 and back."""
        p = fit_pipeline(gappy_ds, impute_specs=[], target=Columns.FATIGUE_STRENGTH, seed=0)
        p = replace(p, yj_lambda=1.0, target_mean=2.0, target_std=1.0)
        assert transform_target(p, np.array([100.0]))[0] == pytest.approx(0.0, abs=1e-12)
        assert inverse_target(p, np.array([0.0]))[0] == pytest.approx(100.0, rel=1e-12)

    @typechecked
    def test_round_trip_and_monotone(self, gappy_ds: Dataset) -> None:
        """inverse_target undoes transform_target and keeps order."""
        p = fit_pipeline(gappy_ds, impute_specs=[], target=Columns.FATIGUE_STRENGTH, seed=0)
        y = np.array([20.0, 55.5, 100.0, 180.0, 420.0])
        transformed = transform_target(p, y)
        assert (np.diff(transformed) > 0).all()
        np.testing.assert_allclose(inverse_target(p, transformed), y, rtol=1e-9)


@typechecked
def test_pipeline_file(gappy_ds: Dataset, tmp_path: Path) -> None:
    """A saved pipeline transforms exactly like the fitted one."""
    p = fit_pipeline(gappy_ds, impute_specs=[], target=Columns.FATIGUE_STRENGTH, seed=2)
    loaded = load_pipeline(save_pipeline(p, tmp_path / "pipeline.json"))
    assert loaded == p
    np.testing.assert_array_equal(
        apply_pipeline(loaded, gappy_ds, seed=2)[0], apply_pipeline(p, gappy_ds, seed=2)[0]
    )


@typechecked
def test_fit_ignores_test_rows(gappy_ds: Dataset, tmp_path: Path) -> None:
    """Changing only test rows leaves the pipeline fitted on the train rows unchanged."""
    _, test_positions = split_positions(gappy_ds.n_rows, 0.25, seed=5)
    changed = gappy_ds
    for name in (Columns.YIELD_STRENGTH, Columns.FATIGUE_STRENGTH):
        values = np.asarray(gappy_ds.column(name).data, dtype=np.float64).copy()
        values[test_positions] = gappy_ds.observed(name).max()
        mask = gappy_ds.mask(name).copy()
        if name == Columns.YIELD_STRENGTH:
            mask[test_positions[::2]] = True
        changed = changed.with_column(gappy_ds.schema.spec(name), values, mask)

    paths = []
    for label, ds in (("original", gappy_ds), ("changed", changed)):
        train, _ = train_test_split(ds, 0.25, seed=5)
        p = fit_pipeline(train, impute_specs=[], target=Columns.FATIGUE_STRENGTH, seed=6)
        paths.append(save_pipeline(p, tmp_path / f"{label}.json"))
    assert paths[0].read_bytes() == paths[1].read_bytes()
