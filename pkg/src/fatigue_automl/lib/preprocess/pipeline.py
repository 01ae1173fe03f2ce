"""Fit-on-train, apply-anywhere preprocessing.

Per-column imputation, binary and one-hot encoding, feature standardization, and the
target chain: decadic log, Yeo-Johnson, standardization.
"""

import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from typeguard import typechecked

from fatigue_automl.lib.constants import (
    ColumnKind,
    Columns,
    ImputeStrategy,
    PostTreatment,
    TransformDirection,
    WeldType,
)
from fatigue_automl.lib.errors import (
    AllMissingColumn,
    ConfigError,
    NonPositiveTarget,
    SchemaMismatch,
)
from fatigue_automl.lib.preprocess.power import yj_fit_lambda, yj_transform
from fatigue_automl.lib.tabular.dataset import Dataset
from fatigue_automl.lib.tabular.feature_schema import ColumnSpec, FeatureSchema
from fatigue_automl.lib.utils import derive_rng, dump_json, load_json

logger = logging.getLogger(__name__)

PIPELINE_FORMAT_VERSION = 1
_CONSTANT_PREFIX = "constant:"

# Variability-bearing reals are imputed by drawing observed values.
RANDOM_SAMPLE_COLUMNS = (
    Columns.YIELD_STRENGTH,
    Columns.TENSILE_STRENGTH,
    Columns.STRESS_RATIO,
    Columns.FREQUENCY,
    Columns.FILLER_YIELD_STRENGTH,
    Columns.FILLER_TENSILE_STRENGTH,
)
CONSTANT_DEFAULTS: dict[str, str] = {
    Columns.POST_TREAT: PostTreatment.AS_WELDED,
    Columns.WELD_TYPE: WeldType.FILLET,
    Columns.PRE_TREAT: "none",
}


@dataclass(frozen=True)
class ImputeSpec:
    """How to fill the missing cells of one column.

    `median` on binary or categorical columns fills the most frequent training level.
    """

    column: str
    strategy: ImputeStrategy
    value: str | float | None = None

    def __post_init__(self) -> None:
        """Check that only the constant strategy carries a value."""
        object.__setattr__(self, "strategy", ImputeStrategy(self.strategy))
        if (self.strategy == ImputeStrategy.CONSTANT) != (self.value is not None):
            raise ValueError(f"{self.column}: only the constant strategy takes a value.")

    @classmethod
    def parse(cls, column: str, text: str) -> "ImputeSpec":
        """Parse "median", "random_sample" or "constant:<value>"."""
        text = text.strip()
        if text.startswith(_CONSTANT_PREFIX):
            return cls(
                column=column,
                strategy=ImputeStrategy.CONSTANT,
                value=text.removeprefix(_CONSTANT_PREFIX),
            )
        try:
            return cls(column=column, strategy=ImputeStrategy(text))
        except ValueError as e:
            raise ConfigError(f"Unknown impute strategy for {column}: {text!r}") from e


@dataclass(frozen=True)
class FittedImputer:
    """Fitted fill state of one column: a fill value, or a sorted pool of draws."""

    column: str
    strategy: ImputeStrategy
    fill: str | float | None = None
    pool: tuple[str | float, ...] = ()


@dataclass(frozen=True)
class FittedPipeline:
    """Frozen preprocessing state fitted on a training partition."""

    columns: tuple[ColumnSpec, ...]
    target: str
    imputers: dict[str, FittedImputer]
    # Binary columns map to the schema levels; categorical to the observed training levels.
    encoders: dict[str, tuple[str, ...]]
    feature_names: tuple[str, ...]
    feature_mean: tuple[float, ...]
    feature_std: tuple[float, ...]
    log10_target: bool
    yj_lambda: float
    target_mean: float
    target_std: float
    seed: int
    version: int = field(default=PIPELINE_FORMAT_VERSION)

    @property
    def input_names(self) -> list[str]:
        """The dataset columns the pipeline reads, excluding the target."""
        return [spec.name for spec in self.columns]

    @property
    def real_feature_names(self) -> list[str]:
        """Encoded names of the real input columns."""
        return [spec.name for spec in self.columns if spec.kind == ColumnKind.REAL]

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        return {
            "version": self.version,
            "columns": [asdict(spec) for spec in self.columns],
            "target": self.target,
            "imputers": {name: asdict(imp) for name, imp in self.imputers.items()},
            "encoders": {name: list(levels) for name, levels in self.encoders.items()},
            "feature_names": list(self.feature_names),
            "feature_mean": list(self.feature_mean),
            "feature_std": list(self.feature_std),
            "log10_target": self.log10_target,
            "yj_lambda": self.yj_lambda,
            "target_mean": self.target_mean,
            "target_std": self.target_std,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FittedPipeline":
        """Rebuild from `to_dict` output."""
        if data.get("version") != PIPELINE_FORMAT_VERSION:
            raise SchemaMismatch(
                f"Unsupported pipeline format version {data.get('version')}."
            )
        columns = []
        for spec in data["columns"]:
            levels = spec.pop("levels")
            columns.append(
                ColumnSpec(**spec, levels=None if levels is None else tuple(levels))
            )
        return cls(
            columns=tuple(columns),
            target=data["target"],
            imputers={
                name: FittedImputer(
                    column=imp["column"],
                    strategy=ImputeStrategy(imp["strategy"]),
                    fill=imp["fill"],
                    pool=tuple(imp["pool"]),
                )
                for name, imp in data["imputers"].items()
            },
            encoders={name: tuple(levels) for name, levels in data["encoders"].items()},
            feature_names=tuple(data["feature_names"]),
            feature_mean=tuple(float(val) for val in data["feature_mean"]),
            feature_std=tuple(float(val) for val in data["feature_std"]),
            log10_target=bool(data["log10_target"]),
            yj_lambda=float(data["yj_lambda"]),
            target_mean=float(data["target_mean"]),
            target_std=float(data["target_std"]),
            seed=int(data["seed"]),
        )


@typechecked
def default_impute_specs(schema: FeatureSchema, columns: Sequence[str]) -> list[ImputeSpec]:
    """Default imputation for the given feature columns.

    Constant fills for treatments and weld type, random draws for strengths, stress
    ratio and frequency, and the median (most frequent level) otherwise.
    """
    specs = []
    for name in columns:
        if name in CONSTANT_DEFAULTS:
            specs.append(
                ImputeSpec(name, ImputeStrategy.CONSTANT, value=CONSTANT_DEFAULTS[name])
            )
        elif name in RANDOM_SAMPLE_COLUMNS and schema.spec(name).kind == ColumnKind.REAL:
            specs.append(ImputeSpec(name, ImputeStrategy.RANDOM_SAMPLE))
        else:
            specs.append(ImputeSpec(name, ImputeStrategy.MEDIAN))
    return specs


@typechecked
def fit_pipeline(
    train: Dataset,
    impute_specs: Sequence[ImputeSpec],
    target: str,
    seed: int,
    features: Sequence[str] | None = None,
) -> FittedPipeline:
    """Fit the preprocessing state on a training partition.

    Args:
        train: The training partition.
        impute_specs: Imputation per column. Feature columns without a spec get the
            default of `default_impute_specs`.
        target: The target column. Must be fully observed and positive.
        seed: Seed of the random imputation streams.
        features: Feature columns to use. Defaults to every non-target column.

    Returns:
        The fitted pipeline.

    Raises:
        AllMissingColumn: If a column to impute from data has no observed values.
        NonPositiveTarget: If a target value is not positive.
        SchemaMismatch: If a named column is not in the dataset.
    """
    schema = train.schema
    features = list(schema.feature_names if features is None else features)
    for name in [*features, target, *(spec.column for spec in impute_specs)]:
        if name not in schema:
            raise SchemaMismatch(f"Column {name!r} not in dataset.")
    if target in features:
        raise ValueError(f"Target {target!r} cannot be a feature.")

    specs_by_column = {spec.column: spec for spec in default_impute_specs(schema, features)}
    specs_by_column.update({spec.column: spec for spec in impute_specs})

    imputers = {
        name: _fit_imputer(spec=schema.spec(name), impute=specs_by_column[name], ds=train)
        for name in features
    }
    columns = tuple(schema.spec(name) for name in features)
    imputed = {name: _impute(imputers[name], train, seed) for name in features}

    encoders: dict[str, tuple[str, ...]] = {}
    for spec in columns:
        if spec.kind == ColumnKind.BINARY:
            encoders[spec.name] = tuple(spec.levels or ())
        elif spec.kind == ColumnKind.CATEGORICAL:
            observed = set(imputed[spec.name].tolist())
            encoders[spec.name] = tuple(
                level for level in spec.levels or () if level in observed
            )

    raw, names = _encode(columns=columns, encoders=encoders, imputed=imputed)
    mean = raw.mean(axis=0) if len(raw) else np.zeros(raw.shape[1])
    std = raw.std(axis=0, ddof=1) if len(raw) > 1 else np.ones(raw.shape[1])
    constant = ~(std > 0)
    for name in np.asarray(names)[constant]:
        logger.warning(f"Feature {name} is constant on the training partition. Scale 1.")
    std = np.where(constant, 1.0, std)

    log_target = _log10_target(train, target)
    yj_lambda = yj_fit_lambda(log_target)
    transformed = yj_transform(log_target, yj_lambda, TransformDirection.FORWARD)
    target_std = float(transformed.std(ddof=1))

    pipeline = FittedPipeline(
        columns=columns,
        target=target,
        imputers=imputers,
        encoders=encoders,
        feature_names=tuple(names),
        feature_mean=tuple(float(val) for val in mean),
        feature_std=tuple(float(val) for val in std),
        log10_target=True,
        yj_lambda=float(yj_lambda),
        target_mean=float(transformed.mean()),
        target_std=target_std,
        seed=seed,
    )
    logger.info(
        f"Fitted pipeline on {train.n_rows} rows: {len(names)} encoded features, "
        f"Yeo-Johnson lambda {yj_lambda:.6g}."
    )
    return pipeline


@typechecked
def encode_features(
    p: FittedPipeline, ds: Dataset, seed: int
) -> tuple[np.ndarray, list[str]]:
    """Impute and encode features without standardization.

    Args:
        p: The fitted pipeline.
        ds: A dataset with the pipeline's input columns.
        seed: Seed of the random imputation streams.

    Returns:
        The n x d encoded matrix and the encoded feature names.
    """
    _check_conforms(p, ds)
    imputed = {name: _impute(p.imputers[name], ds, seed) for name in p.input_names}
    raw, names = _encode(columns=p.columns, encoders=p.encoders, imputed=imputed)
    if tuple(names) != p.feature_names:
        raise SchemaMismatch("Encoded feature names differ from the fitted pipeline.")
    return raw, names


@typechecked
def transform_features(p: FittedPipeline, ds: Dataset, seed: int) -> np.ndarray:
    """Impute, encode and standardize features with the training moments."""
    raw, _ = encode_features(p, ds, seed)
    return standardize(p, raw)


@typechecked
def standardize(p: FittedPipeline, raw: np.ndarray) -> np.ndarray:
    """Standardize an encoded matrix with the training moments."""
    return (raw - np.asarray(p.feature_mean)) / np.asarray(p.feature_std)


@typechecked
def transform_target(p: FittedPipeline, y: np.ndarray) -> np.ndarray:
    """Map targets in MPa to the standardized Yeo-Johnson scale."""
    y = np.asarray(y, dtype=float)
    if (y <= 0).any():
        raise NonPositiveTarget(f"{int((y <= 0).sum())} target values are not positive.")
    transformed = yj_transform(np.log10(y), p.yj_lambda, TransformDirection.FORWARD)
    return (transformed - p.target_mean) / p.target_std


@typechecked
def apply_pipeline(
    p: FittedPipeline, ds: Dataset, seed: int
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Apply a fitted pipeline to a dataset.

    Args:
        p: The fitted pipeline.
        ds: A dataset with the pipeline's input columns and the target.
        seed: Seed of the random imputation streams. Draws for a missing cell depend on
            (seed, column, row id) only.

    Returns:
        The standardized n x d feature matrix, the transformed target, and the feature
        names ("<column>=<level>" for one-hot columns).

    Raises:
        SchemaMismatch: If the dataset lacks a pipeline column or the target.
    """
    raw, names = encode_features(p, ds, seed)
    return standardize(p, raw), transform_target(p, _log_target_source(ds, p.target)), names


@typechecked
def target_values(p: FittedPipeline, ds: Dataset) -> np.ndarray:
    """The target column of a dataset in MPa.

    Raises:
        SchemaMismatch: If the target is absent or has missing values.
    """
    return _log_target_source(ds, p.target)


@typechecked
def inverse_target(p: FittedPipeline, y_transformed: np.ndarray) -> np.ndarray:
    """Map standardized Yeo-Johnson targets back to MPa.

    De-standardize, invert Yeo-Johnson, then raise 10 to the result.
    """
    y_transformed = np.asarray(y_transformed, dtype=float)
    log_target = yj_transform(
        y_transformed * p.target_std + p.target_mean, p.yj_lambda, TransformDirection.INVERSE
    )
    return np.power(10.0, log_target) if p.log10_target else log_target


@typechecked
def save_pipeline(p: FittedPipeline, path: Path) -> Path:
    """Write a pipeline as JSON."""
    return dump_json(p.to_dict(), path)


@typechecked
def load_pipeline(path: Path) -> FittedPipeline:
    """Read a pipeline written by `save_pipeline`."""
    return FittedPipeline.from_dict(load_json(path))


def _fit_imputer(spec: ColumnSpec, impute: ImputeSpec, ds: Dataset) -> FittedImputer:
    observed = ds.observed(spec.name)
    if impute.strategy == ImputeStrategy.CONSTANT:
        if spec.kind == ColumnKind.REAL:
            try:
                fill: str | float = float(impute.value)  # type: ignore[arg-type]
            except ValueError as e:
                raise ConfigError(
                    f"{spec.name}: constant {impute.value!r} is not a number."
                ) from e
        else:
            fill = str(impute.value)
            if fill not in (spec.levels or ()):
                raise ConfigError(f"{spec.name}: constant {fill!r} is not a level.")
        return FittedImputer(column=spec.name, strategy=impute.strategy, fill=fill)

    if len(observed) == 0:
        raise AllMissingColumn(f"Column {spec.name} has no observed training values.")

    if impute.strategy == ImputeStrategy.RANDOM_SAMPLE:
        pool = sorted(observed.tolist())
        return FittedImputer(column=spec.name, strategy=impute.strategy, pool=tuple(pool))

    if spec.kind == ColumnKind.REAL:
        fill = float(np.median(observed.astype(float)))
    else:
        counts = [(int((observed == level).sum()), level) for level in spec.levels or ()]
        # Most frequent; ties go to the earlier schema level.
        fill = max(counts, key=lambda item: item[0])[1]
    return FittedImputer(column=spec.name, strategy=impute.strategy, fill=fill)


def _impute(imputer: FittedImputer, ds: Dataset, seed: int) -> np.ndarray:
    values = ds.column(imputer.column)
    missing = np.ma.getmaskarray(values)
    filled = np.array(values.data, copy=True)
    if not missing.any():
        return filled
    if imputer.strategy == ImputeStrategy.RANDOM_SAMPLE:
        pool = imputer.pool
        for position in np.flatnonzero(missing):
            rng = derive_rng(seed, imputer.column, int(ds.row_ids[position]))
            filled[position] = pool[int(rng.integers(len(pool)))]
    else:
        filled[missing] = imputer.fill
    return filled


def _encode(
    columns: Sequence[ColumnSpec],
    encoders: dict[str, tuple[str, ...]],
    imputed: dict[str, np.ndarray],
) -> tuple[np.ndarray, list[str]]:
    blocks = []
    names = []
    for spec in columns:
        values = imputed[spec.name]
        if spec.kind == ColumnKind.REAL:
            blocks.append(values.astype(float)[:, None])
            names.append(spec.name)
        elif spec.kind == ColumnKind.BINARY:
            # First level encodes to 0.
            blocks.append((values == encoders[spec.name][1]).astype(float)[:, None])
            names.append(spec.name)
        else:
            levels = encoders[spec.name]
            # Levels unseen in training leave every indicator at 0.
            blocks.append(
                np.column_stack([(values == level).astype(float) for level in levels])
                if levels
                else np.zeros((len(values), 0))
            )
            names.extend(f"{spec.name}={level}" for level in levels)
    n_rows = len(next(iter(imputed.values()))) if imputed else 0
    raw = np.hstack(blocks) if blocks else np.zeros((n_rows, 0))
    return raw, names


def _check_conforms(p: FittedPipeline, ds: Dataset) -> None:
    for spec in p.columns:
        if spec.name not in ds:
            raise SchemaMismatch(f"Dataset lacks pipeline column {spec.name!r}.")
        if ds.schema.spec(spec.name).kind != spec.kind:
            raise SchemaMismatch(f"Column {spec.name!r} changed kind.")


def _log_target_source(ds: Dataset, target: str) -> np.ndarray:
    if target not in ds:
        raise SchemaMismatch(f"Dataset lacks target {target!r}.")
    if ds.n_missing(target):
        raise SchemaMismatch(f"Target {target!r} has missing values.")
    return ds.observed(target).astype(float)


def _log10_target(ds: Dataset, target: str) -> np.ndarray:
    y = _log_target_source(ds, target)
    if (y <= 0).any():
        raise NonPositiveTarget(f"{int((y <= 0).sum())} target values are not positive.")
    return np.log10(y)
