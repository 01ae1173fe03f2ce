"""Permutation feature importance."""

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
import pandera.pandas as pa
from pandera.typing import DataFrame
from typeguard import typechecked

from fatigue_automl.lib.automl.ensemble import EnsembleModel
from fatigue_automl.lib.constants import PERMUTATION_REPEATS, TableColumns
from fatigue_automl.lib.errors import LengthMismatch
from fatigue_automl.lib.learners.model import FittedModel, predict
from fatigue_automl.lib.schema import PermutationImportance
from fatigue_automl.lib.schema.utils import schema_error_handler
from fatigue_automl.lib.utils import derive_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ImportanceTable:
    """RMSE degradation per feature over the permutation repeats.

    `degradation` is repeats x d; entries are permuted RMSE minus baseline RMSE.
    """

    feature_names: tuple[str, ...]
    baseline: float
    degradation: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        """Mean degradation per feature."""
        return self.degradation.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        """Population standard deviation of the degradation per feature."""
        return self.degradation.std(axis=0)

    @property
    def ranking(self) -> list[int]:
        """Feature indices by descending mean degradation, ties in feature order."""
        return sorted(range(len(self.feature_names)), key=lambda j: (-self.mean[j], j))


def model_output(m: FittedModel | EnsembleModel, X: np.ndarray) -> np.ndarray:
    """Predictions of a single model or an ensemble."""
    return m.predict(X) if isinstance(m, EnsembleModel) else predict(m, X)


def _rmse(y: np.ndarray, yhat: np.ndarray) -> float:
    return math.sqrt(float(np.mean((y - yhat) ** 2)))


@typechecked
def permutation_importance(
    m: FittedModel | EnsembleModel,
    X: np.ndarray,
    y: np.ndarray,
    feature_names: tuple[str, ...] | list[str] = (),
    repeats: int = PERMUTATION_REPEATS,
    seed: int = 0,
) -> ImportanceTable:
    """RMSE increase when one column is shuffled, per feature and repeat.

    The shuffle of feature j in repeat r uses the stream (seed, r, j), so the table does
    not depend on the order features are visited.

    Args:
        m: The model.
        X: n x d rows in the model's feature space.
        y: n targets in the model's output space.
        feature_names: Names of the d features. Defaults to the model's.
        repeats: Shuffles per feature, >= 1.
        seed: Seed of the shuffles.

    Raises:
        LengthMismatch: If X and y differ in length.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be at least 1. Got {repeats}.")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(X) != len(y):
        raise LengthMismatch(f"{len(X)} rows against {len(y)} targets.")
    names = tuple(feature_names) or tuple(m.feature_names)
    if len(names) != X.shape[1]:
        raise ValueError(f"Got {len(names)} feature names for {X.shape[1]} columns.")

    baseline = _rmse(y, model_output(m, X))
    degradation = np.zeros((repeats, X.shape[1]))
    permuted = X.copy()
    for j in range(X.shape[1]):
        for r in range(repeats):
            permuted[:, j] = derive_rng(seed, r, j).permutation(X[:, j])
            degradation[r, j] = _rmse(y, model_output(m, permuted)) - baseline
        permuted[:, j] = X[:, j]
    logger.info(f"Permutation importance over {X.shape[1]} features, {repeats} repeats.")
    return ImportanceTable(feature_names=names, baseline=baseline, degradation=degradation)


@schema_error_handler
@pa.check_types(lazy=True)
def importance_frame(table: ImportanceTable) -> DataFrame[PermutationImportance]:
    """The ranked importance table."""
    mean = table.mean
    std = table.std
    return pd.DataFrame(
        [
            {
                TableColumns.RANK: rank,
                TableColumns.FEATURE: table.feature_names[j],
                TableColumns.MEAN: float(mean[j]),
                TableColumns.STD: float(std[j]),
            }
            for rank, j in enumerate(table.ranking, start=1)
        ],
        columns=[
            TableColumns.RANK, TableColumns.FEATURE, TableColumns.MEAN, TableColumns.STD
        ],
    )
