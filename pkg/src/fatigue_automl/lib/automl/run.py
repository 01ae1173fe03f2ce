"""One hypothesis run, from a fixed train/test split to an evaluated, explained ensemble.

Stages, in order: preprocess, vif, golden, search, ensemble, refit, evaluate, explain.
Any failure is re-raised as a StageError carrying the stage label. Only the evaluate and
explain stages see the test partition.
"""

import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from typeguard import typechecked

from fatigue_automl.lib.automl.bundle import ModelBundle, golden_document
from fatigue_automl.lib.automl.cv import TrialRecord
from fatigue_automl.lib.automl.ensemble import (
    EnsembleDefinition,
    EnsembleModel,
    greedy_ensemble,
)
from fatigue_automl.lib.automl.hypotheses import hypothesis, resolve_features
from fatigue_automl.lib.automl.search import family_rmse, hpo_search, leaderboard_frame
from fatigue_automl.lib.constants import (
    DEFAULT_BAND,
    DEFAULT_BUDGET_SECONDS,
    DEFAULT_FAMILIES,
    DEFAULT_FOLDS,
    DEFAULT_MAX_MEMBERS,
    DEFAULT_VIF_THRESHOLD,
    ITERATIVE_FAMILIES,
    AuditPolicy,
    Columns,
    ExplainFiles,
    Hypothesis,
    RunFiles,
)
from fatigue_automl.lib.errors import StageError
from fatigue_automl.lib.evalx.metrics import (
    Metrics,
    ParityTable,
    metrics_table,
    parity_frame,
    parity_table,
    regression_metrics,
    try_banded_metrics,
)
from fatigue_automl.lib.explain.artifacts import (
    ExplainOptions,
    Explanation,
    explain_bundle,
    write_explanation,
)
from fatigue_automl.lib.features.engineered import add_overhang
from fatigue_automl.lib.features.golden import (
    AuditFlag,
    GoldenAugmenter,
    GoldenDiscovery,
    audit_golden,
    discover_golden,
    golden_frame,
    included_features,
)
from fatigue_automl.lib.features.vif import VifScreen, vif_rounds_frame, vif_screen
from fatigue_automl.lib.learners.model import fit, learning_curve
from fatigue_automl.lib.preprocess.pipeline import (
    FittedPipeline,
    ImputeSpec,
    encode_features,
    fit_pipeline,
    inverse_target,
    standardize,
    target_values,
    transform_target,
)
from fatigue_automl.lib.reporting.run_dir import RunDirectory
from fatigue_automl.lib.reporting.svg import learning_curve_figure, rmse_boxplot_figure
from fatigue_automl.lib.tabular.dataset import Dataset

logger = logging.getLogger(__name__)


class Stage:
    """Stage labels of a run, and of the loading steps of the commands around it."""

    INGEST = "ingest"
    LOAD = "load"
    PREPROCESS = "preprocess"
    VIF = "vif"
    GOLDEN = "golden"
    SEARCH = "search"
    ENSEMBLE = "ensemble"
    REFIT = "refit"
    EVALUATE = "evaluate"
    EXPLAIN = "explain"


@dataclass(frozen=True)
class RunOptions:
    """Everything a run needs besides the data.

    Args:
        hypothesis: Feature set name.
        extra_features: Columns added to the hypothesis' features.
        drop_features: Columns removed from them.
        derive_overhang: Replace w_BP and l_S by the overhang and use it as a feature.
        vif_threshold: VIF screening threshold on the real columns. None skips screening.
        golden: Discover, audit and append golden features.
        golden_policy: Audit policy of the golden features.
        folds: Cross-validation folds.
        families: Family entries of the search, e.g. "gbdt:categorical".
        budget_seconds: Search wall-time budget. None for no limit.
        max_trials: Search trial cap. None for no cap.
        max_members: Greedy ensemble pick cap.
        repeats: Seeds averaged per sampled spec.
        jobs: Worker threads. Results do not depend on it.
        pipeline_seed: Seed of the random imputation streams.
        search_seed: Seed of the trial sequence, the folds and golden scoring.
        band: Evaluation band in MPa.
        impute: Imputation overrides per column.
        explain: Explanation settings. None skips the explain stage.
        target: Target column.
    """

    hypothesis: Hypothesis = Hypothesis.M1
    extra_features: tuple[str, ...] = ()
    drop_features: tuple[str, ...] = ()
    derive_overhang: bool = False
    vif_threshold: float | None = DEFAULT_VIF_THRESHOLD
    golden: bool = True
    golden_policy: AuditPolicy = AuditPolicy.STRICT
    folds: int = DEFAULT_FOLDS
    families: tuple[str, ...] = DEFAULT_FAMILIES
    budget_seconds: float | None = DEFAULT_BUDGET_SECONDS
    max_trials: int | None = None
    max_members: int = DEFAULT_MAX_MEMBERS
    repeats: int = 1
    jobs: int = 1
    pipeline_seed: int = 0
    search_seed: int = 0
    band: tuple[float, float] = DEFAULT_BAND
    impute: tuple[ImputeSpec, ...] = ()
    explain: ExplainOptions | None = field(default_factory=ExplainOptions)
    target: str = Columns.FATIGUE_STRENGTH

    def __post_init__(self) -> None:
        """Normalize enums and check the band."""
        object.__setattr__(self, "hypothesis", Hypothesis(self.hypothesis))
        object.__setattr__(self, "golden_policy", AuditPolicy(self.golden_policy))
        if not self.band[0] < self.band[1]:
            raise ValueError(f"The band must have low < high. Got {self.band}.")


@dataclass(frozen=True)
class RunReport:
    """What a run produced."""

    options: RunOptions
    features: tuple[str, ...]
    vif: VifScreen | None
    golden: GoldenDiscovery | None
    golden_flags: tuple[AuditFlag, ...]
    trials: tuple[TrialRecord, ...]
    ensemble: EnsembleDefinition
    bundle: ModelBundle
    metrics: dict[str, Metrics | None]
    metrics_frame: pd.DataFrame
    parity_train: ParityTable
    parity_test: ParityTable
    explanation: Explanation | None
    timings: dict[str, float]

    def metrics_document(self) -> dict[str, Any]:
        """Contents of the metrics file."""
        best = min(
            (record for record in self.trials if record.ok),
            key=lambda record: (record.mean_cv_rmse, record.trial),
        )
        return {
            "hypothesis": str(self.options.hypothesis),
            "features": list(self.features),
            "model_features": self.bundle.feature_names,
            "band": list(self.options.band),
            "train": {
                "full": self.metrics["train_full"].to_dict(),
                "band": _maybe_dict(self.metrics["train_band"]),
            },
            "test": {
                "full": self.metrics["test_full"].to_dict(),
                "band": _maybe_dict(self.metrics["test_band"]),
            },
            "search": {
                "n_trials": len(self.trials),
                "n_failed": sum(not record.ok for record in self.trials),
                "best_trial": best.trial,
                "best_family": best.spec.label,
                "best_mean_cv_rmse": best.mean_cv_rmse,
            },
            "ensemble": self.ensemble.to_dict(),
            "explained_rows": (
                None if self.explanation is None else str(self.explanation.rows)
            ),
        }


def _maybe_dict(metrics: Metrics | None) -> dict[str, float] | None:
    return None if metrics is None else metrics.to_dict()


@contextmanager
def stage(name: str, timings: dict[str, float]) -> Iterator[None]:
    """Time a stage into `timings`; re-raise its failures as StageError."""
    start = time.perf_counter()
    logger.info(f"Stage {name}: start.")
    try:
        yield
    except StageError:
        raise
    except Exception as e:
        raise StageError(name, f"{type(e).__name__}: {e}") from e
    finally:
        timings[name] = time.perf_counter() - start
    logger.info(f"Stage {name}: done in {timings[name]:.3g} s.")


def _preprocess(
    train: Dataset, test: Dataset, options: RunOptions
) -> tuple[Dataset, Dataset, list[str], FittedPipeline]:
    extra = list(options.extra_features)
    if options.derive_overhang:
        train, test = add_overhang(train), add_overhang(test)
        extra.append(Columns.OVERHANG)
    features = resolve_features(
        hypothesis(options.hypothesis), train.schema, extra, options.drop_features
    )
    pipeline = _fit(train, features, options)
    return train, test, features, pipeline


def _fit(train: Dataset, features: list[str], options: RunOptions) -> FittedPipeline:
    return fit_pipeline(
        train,
        impute_specs=[spec for spec in options.impute if spec.column in features],
        target=options.target,
        seed=options.pipeline_seed,
        features=features,
    )


def _screen(
    train: Dataset, features: list[str], pipeline: FittedPipeline, options: RunOptions
) -> tuple[VifScreen | None, list[str], FittedPipeline]:
    """VIF screening of the imputed, unscaled real columns; refit without the dropped."""
    raw, names = encode_features(pipeline, train, pipeline.seed)
    real = pipeline.real_feature_names
    if len(real) < 2:
        logger.info("Fewer than two real features. Skipping VIF screening.")
        return None, features, pipeline
    screen = vif_screen(
        raw[:, [names.index(name) for name in real]], real, options.vif_threshold
    )
    if screen.dropped:
        features = [name for name in features if name not in screen.dropped]
        pipeline = _fit(train, features, options)
    return screen, features, pipeline


def _golden(
    raw: np.ndarray, y: np.ndarray, names: list[str], train: Dataset, options: RunOptions
) -> tuple[GoldenDiscovery, tuple[AuditFlag, ...], GoldenAugmenter]:
    discovery = discover_golden(raw, y, names, seed=options.search_seed, jobs=options.jobs)
    flags = tuple(audit_golden(discovery.candidates, train.schema, options.golden_policy))
    included = included_features(discovery, flags)
    logger.info(
        f"{len(included)} of {discovery.n_selected} selected golden features pass the "
        f"{options.golden_policy} audit."
    )
    return discovery, flags, GoldenAugmenter.fit(included, raw, names)


@typechecked
def run(
    train: Dataset, test: Dataset, options: RunOptions, out: RunDirectory | None = None
) -> RunReport:
    """Run one hypothesis end to end.

    Args:
        train: The training partition. Every fitted state comes from it alone.
        test: The test partition, used for evaluation and explanation only.
        options: Run settings.
        out: Run directory to write artifacts to as each stage completes. Stage wall
            times are written to it even when a stage fails.

    Returns:
        The run report.

    Raises:
        StageError: If a stage fails. The label names the stage.
    """
    timings: dict[str, float] = {}
    try:
        return _run(train, test, options, out, timings)
    finally:
        if out is not None:
            out.write_timings(timings)


def _run(
    train: Dataset,
    test: Dataset,
    options: RunOptions,
    out: RunDirectory | None,
    timings: dict[str, float],
) -> RunReport:
    with stage(Stage.PREPROCESS, timings):
        train, test, features, pipeline = _preprocess(train, test, options)

    screen = None
    with stage(Stage.VIF, timings):
        if options.vif_threshold is not None:
            screen, features, pipeline = _screen(train, features, pipeline, options)
            if out is not None and screen is not None:
                out.table(RunFiles.VIF_ROUNDS, vif_rounds_frame(screen))
        if out is not None:
            out.document(RunFiles.PIPELINE, pipeline.to_dict())

    with stage(Stage.GOLDEN, timings):
        raw, names = encode_features(pipeline, train, pipeline.seed)
        y = transform_target(pipeline, target_values(pipeline, train))
        discovery, flags = None, ()
        augmenter = GoldenAugmenter(features=(), mean=(), std=())
        if options.golden and len(names) >= 2:
            discovery, flags, augmenter = _golden(raw, y, names, train, options)
        if out is not None:
            candidates = []
            if discovery is not None:
                frame = golden_frame(discovery, list(flags))
                candidates = frame.to_dict(orient="records")
            out.document(RunFiles.GOLDEN_FEATURES, golden_document(augmenter, candidates))
        X = np.hstack([standardize(pipeline, raw), augmenter.transform(raw, names)])
        model_names = [*names, *augmenter.names]

    with stage(Stage.SEARCH, timings):
        trials = hpo_search(
            options.families,
            X,
            y,
            budget_seconds=options.budget_seconds,
            max_trials=options.max_trials,
            seed=options.search_seed,
            k=options.folds,
            repeats=options.repeats,
            jobs=options.jobs,
        )

    with stage(Stage.ENSEMBLE, timings):
        definition = greedy_ensemble(trials, y, max_members=options.max_members)
        if out is not None:
            out.table(
                RunFiles.LEADERBOARD, leaderboard_frame(trials, definition.weight_by_trial)
            )
            boxplot = rmse_boxplot_figure(family_rmse(trials))
            out.figure(ExplainFiles.RMSE_BOXPLOT_SVG, boxplot)

    with stage(Stage.REFIT, timings):
        by_trial = {record.trial: record for record in trials}
        members = tuple(
            fit(by_trial[trial].spec, X, y, feature_names=model_names, jobs=options.jobs)
            for trial in definition.members
        )
        bundle = ModelBundle(
            pipeline=pipeline,
            augmenter=augmenter,
            model=EnsembleModel(members=members, weights=definition.weights),
        )
        if out is not None:
            out.document(RunFiles.ENSEMBLE, bundle.model.to_dict())
            for trial, member in zip(definition.members, members):
                out.document(f"{RunFiles.MODELS_DIR}/trial_{trial}.json", member.to_dict())
                if member.family in ITERATIVE_FAMILIES:
                    curve = learning_curve(member)
                    stem = f"{ExplainFiles.LEARNING_CURVE_PREFIX}trial_{trial}"
                    out.table(f"{stem}.csv", curve)
                    out.figure(
                        f"{stem}.svg", learning_curve_figure(curve, f"Trial {trial}")
                    )

    with stage(Stage.EVALUATE, timings):
        actual_train = target_values(pipeline, train)
        predicted_train = inverse_target(pipeline, bundle.model.predict(X))
        actual_test = bundle.actual_mpa(test)
        predicted_test = bundle.predict_mpa(test)
        metrics = {
            "train_full": regression_metrics(actual_train, predicted_train),
            "train_band": try_banded_metrics(actual_train, predicted_train, options.band),
            "test_full": regression_metrics(actual_test, predicted_test),
            "test_band": try_banded_metrics(actual_test, predicted_test, options.band),
        }
        table = metrics_table(
            metrics["train_full"],
            metrics["test_full"],
            metrics["train_band"],
            metrics["test_band"],
        )
        parity_train = parity_table(actual_train, predicted_train, train.row_ids)
        parity_test = parity_table(actual_test, predicted_test, test.row_ids)
        logger.info(
            f"Test RMSE {metrics['test_full'].rmse:.4g} MPa, "
            f"R2 {metrics['test_full'].r2:.4f}; ensemble out-of-fold RMSE "
            f"{definition.history[-1]:.4g} on the model scale."
        )
        if out is not None:
            out.table(RunFiles.METRICS_TABLE, table)
            out.table(RunFiles.PARITY_TRAIN, parity_frame(parity_train))
            out.table(RunFiles.PARITY_TEST, parity_frame(parity_test))

    explanation = None
    if options.explain is not None:
        with stage(Stage.EXPLAIN, timings):
            explanation = explain_bundle(bundle, train, test, options.explain)
            if out is not None:
                write_explanation(explanation, out)

    report = RunReport(
        options=options,
        features=tuple(features),
        vif=screen,
        golden=discovery,
        golden_flags=tuple(flags),
        trials=tuple(trials),
        ensemble=definition,
        bundle=bundle,
        metrics=metrics,
        metrics_frame=table,
        parity_train=parity_train,
        parity_test=parity_test,
        explanation=explanation,
        timings=timings,
    )
    if out is not None:
        out.document(RunFiles.METRICS, report.metrics_document())
    return report
