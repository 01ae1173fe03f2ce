"""Stratified, shuffled k-fold cross-validation for a continuous target."""

import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from typeguard import typechecked

from fatigue_automl.lib.constants import STRATIFICATION_BINS, TrialStatus
from fatigue_automl.lib.errors import TooFewRows
from fatigue_automl.lib.learners.model import LearnerSpec, fit, predict
from fatigue_automl.lib.utils import derive_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialRecord:
    """Cross-validation outcome of one learner spec.

    Failed trials keep their spec and error, with NaN scores and no out-of-fold vector.
    """

    trial: int
    spec: LearnerSpec
    fold_rmse: tuple[float, ...]
    mean_cv_rmse: float
    oof: np.ndarray | None
    seconds: float
    status: TrialStatus = TrialStatus.OK
    error: str = ""

    @property
    def ok(self) -> bool:
        """Whether the trial completed."""
        return self.status == TrialStatus.OK


@typechecked
def stratified_folds(y: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Fold index of every row.

    Rows are binned into deciles of y, shuffled within each bin, and dealt to the folds
    in turn, continuing across bins, so fold sizes differ by at most one.

    Raises:
        TooFewRows: If there are fewer than 2k rows.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2. Got {k}.")
    n = len(y)
    if n < 2 * k:
        raise TooFewRows(f"{k}-fold cross-validation needs at least {2 * k} rows. Got {n}.")
    order = np.argsort(np.asarray(y, dtype=np.float64), kind="stable")
    bins = np.empty(n, dtype=np.int64)
    bins[order] = np.arange(n) * STRATIFICATION_BINS // n

    rng = derive_rng(seed, "folds")
    folds = np.empty(n, dtype=np.int64)
    dealt = 0
    for bin_index in range(STRATIFICATION_BINS):
        members = rng.permutation(np.flatnonzero(bins == bin_index))
        folds[members] = (dealt + np.arange(len(members))) % k
        dealt += len(members)
    return folds


def _rmse(residual: np.ndarray) -> float:
    return math.sqrt(float(np.mean(residual**2)))


@typechecked
def cross_validate(
    spec: LearnerSpec,
    X: np.ndarray,
    y: np.ndarray,
    k: int,
    seed: int,
    folds: np.ndarray | None = None,
    jobs: int = 1,
    trial: int = 0,
) -> TrialRecord:
    """Fit on k - 1 folds and predict the held-out fold, for every fold.

    Args:
        spec: The learner.
        X: n x d features.
        y: n targets.
        k: Fold count, >= 2.
        seed: Seed of the fold assignment.
        folds: Precomputed fold indices, overriding `k` and `seed`.
        jobs: Worker threads across folds. Does not change the record.
        trial: Trial index recorded on the result.

    Returns:
        The record with per-fold RMSE and the out-of-fold predictions.

    Raises:
        TooFewRows: If there are fewer than 2k rows.
    """
    start = time.perf_counter()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    folds = stratified_folds(y, k, seed) if folds is None else np.asarray(folds)
    fold_ids = np.unique(folds)

    def run_fold(fold: int) -> tuple[np.ndarray, np.ndarray]:
        held_out = np.flatnonzero(folds == fold)
        kept = np.flatnonzero(folds != fold)
        model = fit(spec, X[kept], y[kept])
        return held_out, predict(model, X[held_out])

    results = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(run_fold)(int(fold)) for fold in fold_ids
    )
    oof = np.empty(len(y))
    fold_rmse = []
    for held_out, predictions in results:
        oof[held_out] = predictions
        fold_rmse.append(_rmse(predictions - y[held_out]))

    return TrialRecord(
        trial=trial,
        spec=spec,
        fold_rmse=tuple(fold_rmse),
        mean_cv_rmse=float(np.mean(fold_rmse)),
        oof=oof,
        seconds=time.perf_counter() - start,
    )
