"""The data schema for the tables written to run directories."""

from functools import partial

import pandera.pandas as pa
from pandera.typing import Series

from fatigue_automl.lib.constants import (
    AuditReason,
    ColumnKind,
    DecisionKind,
    Family,
    GoldenOp,
    MetricRow,
    TableColumns,
    TrialStatus,
)

# This import registers the checks with pandera, even if unused.
from fatigue_automl.lib.schema import checks  # noqa: F401

_COERCE_FIELD = partial(pa.Field, coerce=True)
_NULLABLE_FIELD = partial(_COERCE_FIELD, nullable=True)
_UNIQUE_FIELD = partial(_COERCE_FIELD, unique=True)

COLUMN_FIELD = partial(_UNIQUE_FIELD, alias=TableColumns.COLUMN)
COUNT_FIELD = partial(_COERCE_FIELD, ge=0)
FEATURE_FIELD = partial(_COERCE_FIELD, alias=TableColumns.FEATURE)
RANK_FIELD = partial(_UNIQUE_FIELD, contiguous=1, alias=TableColumns.RANK)
RATIO_FIELD = partial(_COERCE_FIELD, in_range={"min_value": 0.0, "max_value": 1.0})
ROW_ID_FIELD = partial(_COERCE_FIELD, ge=0, alias=TableColumns.ROW_ID)
STAT_FIELD = partial(_NULLABLE_FIELD)

# Empty, or audit reasons joined by ";":
FLAGS_PATTERN = r"^((" + "|".join(AuditReason) + r")(;|$))*$"


class Missingness(pa.DataFrameModel):
    """Per-column missing percentage, in the layout of the feature table.

    fatigue_automl.lib.tabular.eda.missingness_frame output.
    """

    column: Series[str] = COLUMN_FIELD()
    percent: Series[float] = _COERCE_FIELD(
        in_range={"min_value": 0.0, "max_value": 100.0}, alias=TableColumns.PERCENT
    )

    class Config:
        """The configuration for the schema."""

        strict = True


class EdaStats(pa.DataFrameModel):
    """Per-column descriptive statistics.

    fatigue_automl.lib.tabular.eda.stats_frame output.
    """

    column: Series[str] = COLUMN_FIELD()
    kind: Series[str] = _COERCE_FIELD(isin=list(ColumnKind), alias=TableColumns.KIND)
    count: Series[int] = COUNT_FIELD(alias=TableColumns.COUNT)
    missing: Series[int] = COUNT_FIELD(alias=TableColumns.MISSING)
    missing_ratio: Series[float] = RATIO_FIELD(alias=TableColumns.MISSING_RATIO)
    min: Series[float] = STAT_FIELD(alias=TableColumns.MIN)
    max: Series[float] = STAT_FIELD(alias=TableColumns.MAX)
    mean: Series[float] = STAT_FIELD(alias=TableColumns.MEAN)
    median: Series[float] = STAT_FIELD(alias=TableColumns.MEDIAN)
    std: Series[float] = STAT_FIELD(non_negative_or_nan=True, alias=TableColumns.STD)
    # e.g. "axial:85;bending:15":
    levels: Series[str] = _NULLABLE_FIELD(alias=TableColumns.LEVELS)

    class Config:
        """The configuration for the schema."""

        strict = True


class Histogram(pa.DataFrameModel):
    """Histogram bins of one real column.

    fatigue_automl.lib.tabular.eda.histogram_frame output.
    """

    bin_low: Series[float] = _COERCE_FIELD(alias=TableColumns.BIN_LOW)
    bin_high: Series[float] = _COERCE_FIELD(alias=TableColumns.BIN_HIGH)
    count: Series[int] = COUNT_FIELD(alias=TableColumns.COUNT)

    class Config:
        """The configuration for the schema."""

        strict = True
        lower_below_upper = {
            "low_col": TableColumns.BIN_LOW,
            "high_col": TableColumns.BIN_HIGH,
        }


class Violations(pa.DataFrameModel):
    """Cells outside their column's range or level set.

    fatigue_automl.lib.tabular.ingest.violations_frame output.
    """

    row: Series[int] = _COERCE_FIELD(ge=0, alias=TableColumns.ROW)
    column: Series[str] = _COERCE_FIELD(alias=TableColumns.COLUMN)
    value: Series[str] = _COERCE_FIELD(alias=TableColumns.VALUE)

    class Config:
        """The configuration for the schema."""

        strict = True


class VifRounds(pa.DataFrameModel):
    """VIF tables of every screening round, in (round, feature, VIF) layout.

    fatigue_automl.lib.features.vif.vif_rounds_frame output.
    """

    round: Series[int] = _COERCE_FIELD(ge=1, alias=TableColumns.ROUND)
    feature: Series[str] = FEATURE_FIELD()
    r_squared: Series[float] = RATIO_FIELD(alias=TableColumns.R_SQUARED)
    # Infinite for a perfect auxiliary fit.
    vif: Series[float] = _COERCE_FIELD(ge=1.0, alias=TableColumns.VIF)

    class Config:
        """The configuration for the schema."""

        strict = True


class GoldenFeatures(pa.DataFrameModel):
    """Scored golden feature candidates with audit flags.

    fatigue_automl.lib.features.golden.golden_frame output.
    """

    rank: Series[int] = RANK_FIELD()
    recipe: Series[str] = _UNIQUE_FIELD(alias=TableColumns.RECIPE)
    lhs: Series[str] = _COERCE_FIELD(alias=TableColumns.LHS)
    rhs: Series[str] = _COERCE_FIELD(alias=TableColumns.RHS)
    op: Series[str] = _COERCE_FIELD(isin=list(GoldenOp), alias=TableColumns.OP)
    score: Series[float] = _COERCE_FIELD(ge=0.0, alias=TableColumns.SCORE)
    # e.g. "indicator_arithmetic;mixed_kind":
    flags: Series[str] = _COERCE_FIELD(str_matches=FLAGS_PATTERN, alias=TableColumns.FLAGS)
    selected: Series[bool] = _COERCE_FIELD(alias=TableColumns.SELECTED)
    included: Series[bool] = _COERCE_FIELD(alias=TableColumns.INCLUDED)

    class Config:
        """The configuration for the schema."""

        strict = True
        implies = {"narrow_col": TableColumns.INCLUDED, "wide_col": TableColumns.SELECTED}


class Leaderboard(pa.DataFrameModel):
    """Search trials sorted by mean cross-validation RMSE, with ensemble weights.

    fatigue_automl.lib.automl.search.leaderboard_frame output.
    """

    rank: Series[int] = RANK_FIELD()
    trial: Series[int] = _UNIQUE_FIELD(ge=0, alias=TableColumns.TRIAL)
    family: Series[str] = _COERCE_FIELD(isin=list(Family), alias=TableColumns.FAMILY)
    preset: Series[str] = _NULLABLE_FIELD(alias=TableColumns.PRESET)
    # JSON object, sorted keys:
    hyperparameters: Series[str] = _COERCE_FIELD(alias=TableColumns.HYPERPARAMETERS)
    seed: Series[int] = _COERCE_FIELD(alias=TableColumns.SEED)
    status: Series[str] = _COERCE_FIELD(isin=list(TrialStatus), alias=TableColumns.STATUS)
    mean_cv_rmse: Series[float] = STAT_FIELD(
        non_negative_or_nan=True, alias=TableColumns.MEAN_CV_RMSE
    )
    # e.g. "0.31;0.29;0.33;0.30;0.32":
    fold_rmse: Series[str] = _NULLABLE_FIELD(alias=TableColumns.FOLD_RMSE)
    error: Series[str] = _NULLABLE_FIELD(alias=TableColumns.ERROR)
    ensemble_weight: Series[float] = RATIO_FIELD(alias=TableColumns.ENSEMBLE_WEIGHT)

    class Config:
        """The configuration for the schema."""

        strict = True
        sums_to_one = {"weight_col": TableColumns.ENSEMBLE_WEIGHT}


class ParityRows(pa.DataFrameModel):
    """Actual against predicted values in MPa with closed band membership.

    fatigue_automl.lib.evalx.metrics.parity_frame output.
    """

    row_id: Series[int] = ROW_ID_FIELD()
    actual: Series[float] = _COERCE_FIELD(alias=TableColumns.ACTUAL)
    predicted: Series[float] = _COERCE_FIELD(alias=TableColumns.PREDICTED)
    residual: Series[float] = _COERCE_FIELD(alias=TableColumns.RESIDUAL)
    inside_1_5_sigma: Series[bool] = _COERCE_FIELD(alias=TableColumns.INSIDE_NARROW)
    inside_2_sigma: Series[bool] = _COERCE_FIELD(alias=TableColumns.INSIDE_WIDE)

    class Config:
        """The configuration for the schema."""

        strict = True
        implies = {
            "narrow_col": TableColumns.INSIDE_NARROW,
            "wide_col": TableColumns.INSIDE_WIDE,
        }


class MetricsTable(pa.DataFrameModel):
    """The six comparison metrics for the full range and the evaluation band.

    fatigue_automl.lib.evalx.metrics.metrics_table output.
    """

    metric: Series[str] = _UNIQUE_FIELD(isin=list(MetricRow), alias=TableColumns.METRIC)
    full: Series[float] = _COERCE_FIELD(alias=TableColumns.FULL)
    # NaN when no actual value falls in the band.
    band: Series[float] = _NULLABLE_FIELD(alias=TableColumns.BAND)

    class Config:
        """The configuration for the schema."""

        strict = True


class PermutationImportance(pa.DataFrameModel):
    """Permutation importance, descending by mean RMSE degradation.

    fatigue_automl.lib.explain.permutation.importance_frame output.
    """

    rank: Series[int] = RANK_FIELD()
    feature: Series[str] = FEATURE_FIELD(unique=True)
    mean: Series[float] = _COERCE_FIELD(is_sorted_descending=True, alias=TableColumns.MEAN)
    std: Series[float] = _COERCE_FIELD(ge=0.0, alias=TableColumns.STD)

    class Config:
        """The configuration for the schema."""

        strict = True


class ShapImportance(pa.DataFrameModel):
    """Mean absolute SHAP value per feature, descending.

    fatigue_automl.lib.explain.reports.shap_importance_frame output.
    """

    rank: Series[int] = RANK_FIELD()
    feature: Series[str] = FEATURE_FIELD(unique=True)
    mean_abs_shap: Series[float] = _COERCE_FIELD(
        ge=0.0, is_sorted_descending=True, alias=TableColumns.MEAN_ABS_SHAP
    )

    class Config:
        """The configuration for the schema."""

        strict = True


class Decisions(pa.DataFrameModel):
    """Decision records of the best and worst predictions.

    fatigue_automl.lib.explain.reports.decisions_frame output.
    """

    kind: Series[str] = _COERCE_FIELD(isin=list(DecisionKind), alias=TableColumns.KIND)
    rank: Series[int] = _COERCE_FIELD(ge=1, alias=TableColumns.RANK)
    row_id: Series[int] = ROW_ID_FIELD()
    actual: Series[float] = _COERCE_FIELD(alias=TableColumns.ACTUAL)
    predicted: Series[float] = _COERCE_FIELD(alias=TableColumns.PREDICTED)
    abs_error: Series[float] = _COERCE_FIELD(ge=0.0, alias=TableColumns.ABS_ERROR)
    base_value: Series[float] = _COERCE_FIELD(alias=TableColumns.BASE_VALUE)
    # e.g. "R:-0.41;R_eH:0.12":
    path: Series[str] = _COERCE_FIELD(alias=TableColumns.PATH)

    class Config:
        """The configuration for the schema."""

        strict = True


class LinearCoefficients(pa.DataFrameModel):
    """Coefficients of a linear model, intercept first.

    fatigue_automl.lib.explain.reports.linear_coefficients output.
    """

    feature: Series[str] = FEATURE_FIELD(unique=True)
    coefficient: Series[float] = _COERCE_FIELD(alias=TableColumns.COEFFICIENT)

    class Config:
        """The configuration for the schema."""

        strict = True


class LearningCurve(pa.DataFrameModel):
    """Per-iteration training and validation RMSE of an iterative model.

    fatigue_automl.lib.learners.model.learning_curve output.
    """

    iteration: Series[int] = _UNIQUE_FIELD(contiguous=1, alias=TableColumns.ITERATION)
    train_metric: Series[float] = _COERCE_FIELD(ge=0.0, alias=TableColumns.TRAIN_METRIC)
    valid_metric: Series[float] = STAT_FIELD(
        non_negative_or_nan=True, alias=TableColumns.VALID_METRIC
    )
    best_iteration: Series[int] = _COERCE_FIELD(ge=1, alias=TableColumns.BEST_ITERATION)

    class Config:
        """The configuration for the schema."""

        strict = True
