"""Seeded, time-budgeted random hyperparameter search across learner families."""

import json
import logging
import math
import time
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import replace

import numpy as np
import pandas as pd
import pandera.pandas as pa
from pandera.typing import DataFrame
from typeguard import typechecked

from fatigue_automl.lib.automl.cv import TrialRecord, cross_validate, stratified_folds
from fatigue_automl.lib.constants import (
    DEFAULT_FOLDS,
    Family,
    GbdtPreset,
    TableColumns,
    TrialStatus,
)
from fatigue_automl.lib.learners.model import LearnerSpec
from fatigue_automl.lib.learners.spaces import sample_hyperparameters
from fatigue_automl.lib.schema import Leaderboard
from fatigue_automl.lib.schema.utils import schema_error_handler
from fatigue_automl.lib.utils import derive_rng, to_jsonable

logger = logging.getLogger(__name__)

_SEED_BOUND = 2**31 - 1
_PRESET_SEP = ":"


@typechecked
def parse_family(entry: str) -> tuple[Family, GbdtPreset | None]:
    """Parse a family entry: "nn", "gbdt" or "gbdt:categorical"."""
    family, _, preset = entry.strip().partition(_PRESET_SEP)
    family = Family(family)
    if preset:
        if family != Family.GBDT:
            raise ValueError(f"Only the {Family.GBDT} family has presets. Got {entry!r}.")
        return family, GbdtPreset(preset)
    return family, GbdtPreset.REGULARIZED if family == Family.GBDT else None


@typechecked
def trial_specs(families: Sequence[str], seed: int) -> Iterator[LearnerSpec]:
    """The endless, deterministic sequence of trial specs.

    Trial i takes family entry i mod len(families) and draws its hyperparameters and
    seed from the stream (seed, i).
    """
    if not families:
        raise ValueError("The search needs at least one family.")
    entries = [parse_family(entry) for entry in families]
    index = 0
    while True:
        family, preset = entries[index % len(entries)]
        rng = derive_rng(seed, index)
        hyperparameters = sample_hyperparameters(family, preset, rng)
        yield LearnerSpec(
            family=family,
            hyperparameters=hyperparameters,
            seed=int(rng.integers(_SEED_BOUND)),
            preset=preset,
        )
        index += 1


def _failed(trial: int, spec: LearnerSpec, error: Exception, seconds: float) -> TrialRecord:
    logger.warning(f"Trial {trial} ({spec.label}) failed: {error}")
    return TrialRecord(
        trial=trial,
        spec=spec,
        fold_rmse=(),
        mean_cv_rmse=math.nan,
        oof=None,
        seconds=seconds,
        status=TrialStatus.FAILED,
        error=f"{type(error).__name__}: {error}",
    )


def _repeat_spec(spec: LearnerSpec, repeat: int) -> LearnerSpec:
    if repeat == 0:
        return spec
    return spec.with_seed(int(derive_rng(spec.seed, "repeat", repeat).integers(_SEED_BOUND)))


@typechecked
def evaluate_spec(
    spec: LearnerSpec,
    X: np.ndarray,
    y: np.ndarray,
    folds: np.ndarray,
    trial: int,
    repeats: int = 1,
    jobs: int = 1,
) -> TrialRecord:
    """Cross-validate a spec, averaging over `repeats` derived seeds.

    Failures are returned as failed records, not raised.
    """
    start = time.perf_counter()
    try:
        records = [
            cross_validate(
                _repeat_spec(spec, repeat),
                X,
                y,
                k=len(np.unique(folds)),
                seed=0,
                folds=folds,
                jobs=jobs,
                trial=trial,
            )
            for repeat in range(repeats)
        ]
    except Exception as e:  # noqa: BLE001
        return _failed(trial, spec, e, time.perf_counter() - start)

    fold_rmse = tuple(np.mean([record.fold_rmse for record in records], axis=0).tolist())
    oof = np.mean([record.oof for record in records], axis=0)
    mean_cv_rmse = float(np.mean(fold_rmse))
    if not (math.isfinite(mean_cv_rmse) and np.isfinite(oof).all()):
        error = ValueError("non-finite out-of-fold predictions")
        return _failed(trial, spec, error, time.perf_counter() - start)
    return replace(
        records[0],
        fold_rmse=fold_rmse,
        mean_cv_rmse=mean_cv_rmse,
        oof=oof,
        seconds=time.perf_counter() - start,
    )


@typechecked
def hpo_search(
    families: Sequence[str],
    X: np.ndarray,
    y: np.ndarray,
    budget_seconds: float | None,
    max_trials: int | None,
    seed: int,
    k: int = DEFAULT_FOLDS,
    cv_seed: int | None = None,
    repeats: int = 1,
    jobs: int = 1,
) -> list[TrialRecord]:
    """Random search, round robin over families, until the budget or trial cap is hit.

    Every trial shares one fold assignment. The trial sequence depends on the seed
    only; the budget only moves the cut point. A trial that has started runs to the end.

    Args:
        families: Family entries, e.g. ["baseline", "gbdt:categorical", "nn"].
        X: n x d training features.
        y: n training targets.
        budget_seconds: Wall time after which no new trial starts. None for no limit.
        max_trials: Trial cap. None for no cap.
        seed: Seed of the trial sequence.
        k: Fold count.
        cv_seed: Seed of the fold assignment. Defaults to `seed`.
        repeats: Seeds averaged per spec.
        jobs: Worker threads for folds.

    Returns:
        Every trial in sequence order, failed trials included.
    """
    if budget_seconds is None and max_trials is None:
        raise ValueError("hpo_search needs a time budget or a trial cap.")
    if budget_seconds is not None and not budget_seconds > 0:
        raise ValueError(f"budget_seconds must be positive. Got {budget_seconds}.")
    if max_trials is not None and max_trials < 1:
        raise ValueError(f"max_trials must be at least 1. Got {max_trials}.")
    if repeats < 1:
        raise ValueError(f"repeats must be at least 1. Got {repeats}.")

    folds = stratified_folds(y, k, seed if cv_seed is None else cv_seed)
    start = time.perf_counter()
    trials: list[TrialRecord] = []
    for index, spec in enumerate(trial_specs(families, seed)):
        if max_trials is not None and index >= max_trials:
            break
        if budget_seconds is not None and time.perf_counter() - start >= budget_seconds:
            logger.info(f"Search budget of {budget_seconds:g} s spent after {index} trials.")
            break
        record = evaluate_spec(spec, X, y, folds, trial=index, repeats=repeats, jobs=jobs)
        if record.ok:
            logger.info(
                f"Trial {index} ({spec.label}): mean CV RMSE {record.mean_cv_rmse:.5g}."
            )
        trials.append(record)
    return trials


@typechecked
def family_rmse(trials: Sequence[TrialRecord]) -> dict[str, list[float]]:
    """Mean CV RMSE of the completed trials, per family entry."""
    out: dict[str, list[float]] = {}
    for record in trials:
        if record.ok:
            out.setdefault(record.spec.label, []).append(record.mean_cv_rmse)
    return out


@typechecked
def ranked_trials(trials: Sequence[TrialRecord]) -> list[TrialRecord]:
    """Trials by mean CV RMSE, failed trials last, ties by trial index."""
    return sorted(
        trials,
        key=lambda record: (
            not record.ok,
            record.mean_cv_rmse if record.ok else math.inf,
            record.trial,
        ),
    )


@schema_error_handler
@pa.check_types(lazy=True)
def leaderboard_frame(
    trials: list[TrialRecord], weights: Mapping[int, float]
) -> DataFrame[Leaderboard]:
    """Ranked trials with their ensemble weights (trial index to weight)."""
    rows = []
    for rank, record in enumerate(ranked_trials(trials), start=1):
        rows.append(
            {
                TableColumns.RANK: rank,
                TableColumns.TRIAL: record.trial,
                TableColumns.FAMILY: str(record.spec.family),
                TableColumns.PRESET: "" if record.spec.preset is None else record.spec.preset,
                TableColumns.HYPERPARAMETERS: json.dumps(
                    to_jsonable(record.spec.hyperparameters), sort_keys=True
                ),
                TableColumns.SEED: record.spec.seed,
                TableColumns.STATUS: str(record.status),
                TableColumns.MEAN_CV_RMSE: record.mean_cv_rmse,
                TableColumns.FOLD_RMSE: ";".join(
                    f"{value:.10g}" for value in record.fold_rmse
                ),
                TableColumns.ERROR: record.error,
                TableColumns.ENSEMBLE_WEIGHT: float(weights.get(record.trial, 0.0)),
            }
        )
    return pd.DataFrame(rows)
