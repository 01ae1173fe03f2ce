"""Explain a trained bundle and write the explanation files."""

import logging
import re
from dataclasses import dataclass

import numpy as np
import pandas as pd
from typeguard import typechecked

from fatigue_automl.lib.automl.bundle import ModelBundle
from fatigue_automl.lib.constants import (
    PERMUTATION_REPEATS,
    SHAP_BACKGROUND_SIZE,
    SHAP_PERMUTATIONS,
    TOP_K_DECISIONS,
    ExplainFiles,
    ExplainRows,
    Family,
    TableColumns,
)
from fatigue_automl.lib.evalx.metrics import ParityTable, parity_table
from fatigue_automl.lib.explain.permutation import (
    ImportanceTable,
    importance_frame,
    permutation_importance,
)
from fatigue_automl.lib.explain.reports import (
    ShapReports,
    decisions_frame,
    linear_coefficients,
    shap_reports,
    shap_values_frame,
)
from fatigue_automl.lib.explain.shap import ShapMatrix, sample_background, shap_values
from fatigue_automl.lib.reporting.run_dir import RunDirectory
from fatigue_automl.lib.reporting.svg import beeswarm_figure, importance_figure, parity_figure
from fatigue_automl.lib.tabular.dataset import Dataset

logger = logging.getLogger(__name__)

_OPERATOR_WORDS = {" - ": "_minus_", " / ": "_over_"}
_UNSAFE = re.compile(r"[^A-Za-z0-9_.=-]")


@dataclass(frozen=True)
class ExplainOptions:
    """Knobs of the explanation stage."""

    background_size: int = SHAP_BACKGROUND_SIZE
    shap_samples: int = SHAP_PERMUTATIONS
    permutation_repeats: int = PERMUTATION_REPEATS
    top_k: int = TOP_K_DECISIONS
    rows: ExplainRows = ExplainRows.TEST
    seed: int = 0
    jobs: int = 1

    def __post_init__(self) -> None:
        """Validate the counts."""
        object.__setattr__(self, "rows", ExplainRows(self.rows))
        for name in ("background_size", "shap_samples", "permutation_repeats", "top_k"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1. Got {getattr(self, name)}.")


@dataclass(frozen=True)
class Explanation:
    """Attributions, importance tables and parity tables of one bundle."""

    rows: ExplainRows
    row_ids: np.ndarray
    X_explain: np.ndarray
    shap: ShapMatrix
    reports: ShapReports
    permutation: ImportanceTable
    coefficients: pd.DataFrame | None
    parity_train: ParityTable
    parity_test: ParityTable


def file_stem(feature: str) -> str:
    """A file-name-safe form of a feature name or golden recipe."""
    for operator, word in _OPERATOR_WORDS.items():
        feature = feature.replace(operator, word)
    return _UNSAFE.sub("_", feature)


def _heaviest_linear(bundle: ModelBundle) -> pd.DataFrame | None:
    members = [
        (weight, index)
        for index, (member, weight) in enumerate(
            zip(bundle.model.members, bundle.model.weights)
        )
        if member.family == Family.LINEAR
    ]
    if not members:
        return None
    _, index = max(members, key=lambda item: (item[0], -item[1]))
    return linear_coefficients(bundle.model.members[index])


@typechecked
def explain_bundle(
    bundle: ModelBundle, train: Dataset, test: Dataset, options: ExplainOptions
) -> Explanation:
    """SHAP values, their reports, permutation importance and parity tables.

    Attributions and permutation importance are computed on the model scale
    (standardized Yeo-Johnson of log10 strength), where they sum exactly to the model
    output. Parity tables are in MPa.

    Args:
        bundle: The trained bundle.
        train: The training partition. The SHAP background is drawn from it.
        test: The test partition.
        options: Explanation settings.

    Returns:
        The explanation.
    """
    X_train = bundle.features(train)
    explained = test if options.rows == ExplainRows.TEST else train
    X_explain = X_train if explained is train else bundle.features(test)
    y_explain = bundle.target(explained)
    names = tuple(bundle.feature_names)

    background = sample_background(X_train, options.background_size, options.seed)
    logger.info(
        f"Explaining {len(X_explain)} {options.rows} rows against a background of "
        f"{len(background)} training rows."
    )
    shap = shap_values(
        bundle.model,
        X_explain,
        background,
        feature_names=names,
        n_permutations=options.shap_samples,
        seed=options.seed,
        jobs=options.jobs,
    )
    predictions = bundle.model.predict(X_explain)
    reports = shap_reports(
        shap,
        X_explain,
        predictions,
        y_explain,
        k=min(options.top_k, len(X_explain)),
        row_ids=explained.row_ids,
    )
    permutation = permutation_importance(
        bundle.model,
        X_explain,
        y_explain,
        feature_names=names,
        repeats=options.permutation_repeats,
        seed=options.seed,
    )
    return Explanation(
        rows=options.rows,
        row_ids=np.asarray(explained.row_ids),
        X_explain=X_explain,
        shap=shap,
        reports=reports,
        permutation=permutation,
        coefficients=_heaviest_linear(bundle),
        parity_train=parity_table(
            bundle.actual_mpa(train), bundle.predict_mpa(train), train.row_ids
        ),
        parity_test=parity_table(
            bundle.actual_mpa(test), bundle.predict_mpa(test), test.row_ids
        ),
    )


@typechecked
def write_explanation(explanation: Explanation, out: RunDirectory, prefix: str = "") -> None:
    """Write the explanation tables and figures.

    Args:
        explanation: The explanation.
        out: The run directory.
        prefix: Relative directory for the files, e.g. "explain/".
    """
    shap = explanation.shap
    reports = explanation.reports
    out.table(
        prefix + ExplainFiles.SHAP_VALUES, shap_values_frame(shap, explanation.row_ids)
    )
    out.table(prefix + ExplainFiles.SHAP_IMPORTANCE, reports.importance)
    out.table(prefix + ExplainFiles.PERMUTATION, importance_frame(explanation.permutation))
    out.table(prefix + ExplainFiles.BEESWARM, reports.beeswarm)
    for feature, frame in reports.dependence.items():
        out.table(f"{prefix}{ExplainFiles.DEPENDENCE_PREFIX}{file_stem(feature)}.csv", frame)
    out.table(prefix + ExplainFiles.DECISIONS, decisions_frame(reports.decisions))
    if explanation.coefficients is not None:
        out.table(prefix + ExplainFiles.COEFFICIENTS, explanation.coefficients)

    parity = {"train": explanation.parity_train, "test": explanation.parity_test}
    for name, table in parity.items():
        out.figure(
            f"{prefix}{ExplainFiles.PARITY_SVG_PREFIX}{name}.svg",
            parity_figure(table, title=name.capitalize()),
        )
    out.figure(
        prefix + ExplainFiles.IMPORTANCE_SVG,
        importance_figure(
            reports.importance, TableColumns.MEAN_ABS_SHAP, "Mean |SHAP value|"
        ),
    )
    out.figure(
        prefix + ExplainFiles.BEESWARM_SVG,
        beeswarm_figure(
            reports.beeswarm, reports.importance[TableColumns.FEATURE].tolist(), seed=0
        ),
    )
    logger.info(f"Wrote explanation files to {out.root / prefix}.")
