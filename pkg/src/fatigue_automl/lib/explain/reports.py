"""Tables derived from SHAP values and linear coefficients."""

import logging
from dataclasses import dataclass
from typing import Final

import numpy as np
import pandas as pd
import pandera.pandas as pa
from pandera.typing import DataFrame
from typeguard import typechecked

from fatigue_automl.lib.constants import TOP_K_DECISIONS, DecisionKind, Family, TableColumns
from fatigue_automl.lib.errors import LengthMismatch, NotLinear
from fatigue_automl.lib.explain.shap import ShapMatrix
from fatigue_automl.lib.learners.model import FittedModel, LinearParams
from fatigue_automl.lib.schema import Decisions, LinearCoefficients, ShapImportance
from fatigue_automl.lib.schema.utils import schema_error_handler

logger = logging.getLogger(__name__)

INTERCEPT: Final[str] = "(intercept)"
_PATH_SEP: Final[str] = ";"


@dataclass(frozen=True)
class DecisionRecord:
    """One explained prediction, with its attributions ordered by magnitude.

    `path` holds (feature, attribution) pairs, largest |attribution| first. Walking it
    from `base_value` ends at `prediction`.
    """

    kind: DecisionKind
    rank: int
    row_id: int
    actual: float
    prediction: float
    base_value: float
    path: tuple[tuple[str, float], ...]

    @property
    def cumulative(self) -> np.ndarray:
        """Running output after each step, starting from the base value."""
        steps = np.array([value for _, value in self.path], dtype=np.float64)
        return self.base_value + np.concatenate([[0.0], np.cumsum(steps)])

    @property
    def terminal(self) -> float:
        """Last value of the cumulative path."""
        return float(self.cumulative[-1])


@dataclass(frozen=True)
class ShapReports:
    """Everything derived from one ShapMatrix."""

    importance: pd.DataFrame
    beeswarm: pd.DataFrame
    dependence: dict[str, pd.DataFrame]
    decisions: list[DecisionRecord]


def _check_rows(s: ShapMatrix, *arrays: np.ndarray) -> None:
    for array in arrays:
        if len(array) != len(s.values):
            raise LengthMismatch(f"{len(array)} rows against {len(s.values)} SHAP rows.")


@schema_error_handler
@pa.check_types(lazy=True)
def shap_importance_frame(s: ShapMatrix) -> DataFrame[ShapImportance]:
    """Mean |SHAP value| per feature, descending, ties in feature order."""
    mean_abs = np.zeros(len(s.feature_names))
    if len(s.values):
        mean_abs = np.abs(s.values).mean(axis=0)
    order = sorted(range(len(s.feature_names)), key=lambda j: (-mean_abs[j], j))
    return pd.DataFrame(
        [
            {
                TableColumns.RANK: rank,
                TableColumns.FEATURE: s.feature_names[j],
                TableColumns.MEAN_ABS_SHAP: float(mean_abs[j]),
            }
            for rank, j in enumerate(order, start=1)
        ],
        columns=[TableColumns.RANK, TableColumns.FEATURE, TableColumns.MEAN_ABS_SHAP],
    )


@typechecked
def shap_values_frame(s: ShapMatrix, row_ids: np.ndarray) -> pd.DataFrame:
    """One row per explained row: row id, base value, then one column per feature."""
    _check_rows(s, row_ids)
    frame = pd.DataFrame(s.values, columns=list(s.feature_names))
    frame.insert(0, TableColumns.BASE_VALUE, s.base_value)
    frame.insert(0, TableColumns.ROW_ID, np.asarray(row_ids, dtype=np.int64))
    return frame


@typechecked
def beeswarm_frame(s: ShapMatrix, X_explain: np.ndarray) -> pd.DataFrame:
    """Per point: feature, SHAP value, raw feature value and its min-max normalization.

    Constant features normalize to 0.5.
    """
    _check_rows(s, X_explain)
    low = X_explain.min(axis=0) if len(X_explain) else np.zeros(X_explain.shape[1])
    span = (X_explain.max(axis=0) - low) if len(X_explain) else np.zeros(X_explain.shape[1])
    rows = []
    for j, name in enumerate(s.feature_names):
        values = X_explain[:, j]
        normalized = (values - low[j]) / span[j] if span[j] > 0 else np.full(len(values), 0.5)
        rows.append(
            pd.DataFrame(
                {
                    TableColumns.FEATURE: name,
                    TableColumns.SHAP_VALUE: s.values[:, j],
                    TableColumns.FEATURE_VALUE: values,
                    TableColumns.NORMALIZED_VALUE: normalized,
                }
            )
        )
    return pd.concat(rows, ignore_index=True)


@typechecked
def dependence_frame(s: ShapMatrix, X_explain: np.ndarray, feature: str) -> pd.DataFrame:
    """(feature value, SHAP value) pairs of one feature, sorted by feature value."""
    _check_rows(s, X_explain)
    j = s.feature_names.index(feature)
    frame = pd.DataFrame(
        {
            TableColumns.FEATURE_VALUE: X_explain[:, j],
            TableColumns.SHAP_VALUE: s.values[:, j],
        }
    )
    return frame.sort_values(TableColumns.FEATURE_VALUE, kind="stable", ignore_index=True)


@typechecked
def decision_records(
    s: ShapMatrix,
    predictions: np.ndarray,
    actuals: np.ndarray,
    row_ids: np.ndarray | None = None,
    k: int = TOP_K_DECISIONS,
) -> list[DecisionRecord]:
    """Decision records of the k best (smallest |error|) and k worst rows.

    Ties break by row position. Best records come first, each kind by rank.
    """
    _check_rows(s, predictions, actuals)
    n = len(predictions)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}]. Got {k}.")
    row_ids = np.arange(n) if row_ids is None else np.asarray(row_ids)
    abs_error = np.abs(np.asarray(actuals) - np.asarray(predictions))
    by_error = np.argsort(abs_error, kind="stable")
    worst_first = np.argsort(-abs_error, kind="stable")

    def record(kind: DecisionKind, rank: int, i: int) -> DecisionRecord:
        order = sorted(range(len(s.feature_names)), key=lambda j: (-abs(s.values[i, j]), j))
        return DecisionRecord(
            kind=kind,
            rank=rank,
            row_id=int(row_ids[i]),
            actual=float(actuals[i]),
            prediction=float(predictions[i]),
            base_value=s.base_value,
            path=tuple((s.feature_names[j], float(s.values[i, j])) for j in order),
        )

    best = [record(DecisionKind.BEST, rank, int(i)) for rank, i in enumerate(by_error[:k], 1)]
    worst = [
        record(DecisionKind.WORST, rank, int(i)) for rank, i in enumerate(worst_first[:k], 1)
    ]
    return best + worst


@schema_error_handler
@pa.check_types(lazy=True)
def decisions_frame(records: list[DecisionRecord]) -> DataFrame[Decisions]:
    """Decision records, one row each, the path as "feature:value" steps."""
    return pd.DataFrame(
        [
            {
                TableColumns.KIND: str(record.kind),
                TableColumns.RANK: record.rank,
                TableColumns.ROW_ID: record.row_id,
                TableColumns.ACTUAL: record.actual,
                TableColumns.PREDICTED: record.prediction,
                TableColumns.ABS_ERROR: abs(record.actual - record.prediction),
                TableColumns.BASE_VALUE: record.base_value,
                TableColumns.PATH: _PATH_SEP.join(
                    f"{feature}:{value:.10g}" for feature, value in record.path
                ),
            }
            for record in records
        ],
        columns=[
            TableColumns.KIND,
            TableColumns.RANK,
            TableColumns.ROW_ID,
            TableColumns.ACTUAL,
            TableColumns.PREDICTED,
            TableColumns.ABS_ERROR,
            TableColumns.BASE_VALUE,
            TableColumns.PATH,
        ],
    )


@typechecked
def shap_reports(
    s: ShapMatrix,
    X_explain: np.ndarray,
    predictions: np.ndarray,
    actuals: np.ndarray,
    k: int = TOP_K_DECISIONS,
    row_ids: np.ndarray | None = None,
) -> ShapReports:
    """Importance ranking, beeswarm and dependence data, and decision records."""
    return ShapReports(
        importance=shap_importance_frame(s),
        beeswarm=beeswarm_frame(s, X_explain),
        dependence={
            name: dependence_frame(s, X_explain, name) for name in s.feature_names
        },
        decisions=decision_records(s, predictions, actuals, row_ids=row_ids, k=k),
    )


@schema_error_handler
@pa.check_types(lazy=True)
def linear_coefficients(m: FittedModel) -> DataFrame[LinearCoefficients]:
    """Intercept and coefficients of a linear model, intercept first.

    Raises:
        NotLinear: If the model is not of the linear family.
    """
    if m.family != Family.LINEAR or not isinstance(m.params, LinearParams):
        raise NotLinear(f"Coefficients exist for linear models only. Got {m.family}.")
    names = list(m.feature_names) or [f"x{j}" for j in range(m.n_features)]
    return pd.DataFrame(
        {
            TableColumns.FEATURE: [INTERCEPT, *names],
            TableColumns.COEFFICIENT: [m.params.intercept, *m.params.coef.tolist()],
        }
    )
