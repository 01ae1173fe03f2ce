"""The model zoo behind one fit/predict contract, with versioned JSON persistence."""

import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import pandera.pandas as pa
from pandera.typing import DataFrame
from typeguard import typechecked

from fatigue_automl.lib.constants import (
    ITERATIVE_FAMILIES,
    MODEL_FORMAT_VERSION,
    Family,
    GbdtPreset,
    TableColumns,
)
from fatigue_automl.lib.errors import NotIterative, SchemaMismatch, WidthMismatch
from fatigue_automl.lib.learners.forest import fit_forest
from fatigue_automl.lib.learners.gbdt import BoostedTrees, LogEntry, fit_gbdt
from fatigue_automl.lib.learners.linear import fit_least_squares
from fatigue_automl.lib.learners.nn import NetworkWeights, fit_network
from fatigue_automl.lib.learners.spaces import (
    resolve_hyperparameters,
    validate_hyperparameters,
)
from fatigue_automl.lib.learners.tree import TreeArrays, grow_tree
from fatigue_automl.lib.schema import LearningCurve
from fatigue_automl.lib.schema.utils import schema_error_handler
from fatigue_automl.lib.utils import dump_json, from_json_float, load_json, to_jsonable

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LearnerSpec:
    """A family, its hyperparameters and a seed. Validated on construction.

    Args:
        family: The learner family.
        hyperparameters: Name to value. Names the family does not set fall back to
            defaults at fit time.
        seed: Seed of every stochastic choice of the fit.
        preset: Search-space preset of the gbdt family. Defaults to "regularized" for
            gbdt; must be None for other families.
    """

    family: Family
    hyperparameters: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0
    preset: GbdtPreset | None = None

    def __post_init__(self) -> None:
        """Normalize and validate."""
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        if family == Family.GBDT:
            object.__setattr__(
                self, "preset", GbdtPreset(self.preset or GbdtPreset.REGULARIZED)
            )
        elif self.preset is not None:
            raise ValueError(f"Only the {Family.GBDT} family has presets.")
        validate_hyperparameters(family, self.hyperparameters)
        hyperparameters = dict(sorted(self.hyperparameters.items()))
        object.__setattr__(self, "hyperparameters", hyperparameters)

    @property
    def label(self) -> str:
        """Family name, with the preset for gbdt (e.g. "gbdt:categorical")."""
        return self.family if self.preset is None else f"{self.family}:{self.preset}"

    def with_seed(self, seed: int) -> "LearnerSpec":
        """The same spec with another seed."""
        return LearnerSpec(
            family=self.family,
            hyperparameters=self.hyperparameters,
            seed=seed,
            preset=self.preset,
        )

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        return {
            "family": str(self.family),
            "hyperparameters": dict(self.hyperparameters),
            "seed": self.seed,
            "preset": None if self.preset is None else str(self.preset),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "LearnerSpec":
        """Rebuild from `to_dict` output."""
        return cls(
            family=Family(data["family"]),
            hyperparameters=dict(data["hyperparameters"]),
            seed=int(data["seed"]),
            preset=None if data.get("preset") is None else GbdtPreset(data["preset"]),
        )


@dataclass(frozen=True)
class ConstantParams:
    """Baseline: the training mean."""

    value: float

    def predict(self, X: np.ndarray) -> np.ndarray:  # noqa: D102
        return np.full(X.shape[0], self.value)

    def to_dict(self) -> dict[str, Any]:  # noqa: D102
        return {"value": self.value}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ConstantParams":  # noqa: D102
        return cls(value=float(data["value"]))


@dataclass(frozen=True)
class LinearParams:
    """Intercept and coefficients of a least-squares fit."""

    intercept: float
    coef: np.ndarray
    rank: int

    def predict(self, X: np.ndarray) -> np.ndarray:  # noqa: D102
        return self.intercept + X @ self.coef

    def to_dict(self) -> dict[str, Any]:  # noqa: D102
        return {"intercept": self.intercept, "coef": self.coef.tolist(), "rank": self.rank}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LinearParams":  # noqa: D102
        return cls(
            intercept=float(data["intercept"]),
            coef=np.asarray(data["coef"], dtype=np.float64),
            rank=int(data["rank"]),
        )


@dataclass(frozen=True)
class TreeEnsembleParams:
    """Trees combined as init + weight * sum of tree outputs.

    A single tree has init 0 and weight 1, a forest init 0 and weight 1/B, boosted
    trees the training mean and the learning rate.
    """

    init: float
    weight: float
    trees: tuple[TreeArrays, ...]

    def predict(self, X: np.ndarray) -> np.ndarray:  # noqa: D102
        return BoostedTrees(
            init=self.init, learning_rate=self.weight, trees=self.trees
        ).predict(X)

    def tree_ensemble(self) -> tuple[float, tuple[TreeArrays, ...], np.ndarray]:
        """The init value, the trees and the per-tree weights."""
        return self.init, self.trees, np.full(len(self.trees), self.weight)

    def to_dict(self) -> dict[str, Any]:  # noqa: D102
        return {
            "init": self.init,
            "weight": self.weight,
            "trees": [tree.to_dict() for tree in self.trees],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TreeEnsembleParams":  # noqa: D102
        return cls(
            init=float(data["init"]),
            weight=float(data["weight"]),
            trees=tuple(TreeArrays.from_dict(tree) for tree in data["trees"]),
        )


@dataclass(frozen=True)
class NetworkParams:
    """Weights of a two-hidden-layer network."""

    weights: NetworkWeights

    def predict(self, X: np.ndarray) -> np.ndarray:  # noqa: D102
        return self.weights.predict(X)

    def to_dict(self) -> dict[str, Any]:  # noqa: D102
        w = self.weights
        return {
            "w1": w.w1.tolist(),
            "b1": w.b1.tolist(),
            "w2": w.w2.tolist(),
            "b2": w.b2.tolist(),
            "w3": w.w3.tolist(),
            "b3": w.b3,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "NetworkParams":  # noqa: D102
        return cls(
            weights=NetworkWeights(
                w1=np.asarray(data["w1"], dtype=np.float64),
                b1=np.asarray(data["b1"], dtype=np.float64),
                w2=np.asarray(data["w2"], dtype=np.float64),
                b2=np.asarray(data["b2"], dtype=np.float64),
                w3=np.asarray(data["w3"], dtype=np.float64),
                b3=float(data["b3"]),
            )
        )


ModelParams = ConstantParams | LinearParams | TreeEnsembleParams | NetworkParams

_PARAMS_CLASS: dict[Family, type] = {
    Family.BASELINE: ConstantParams,
    Family.LINEAR: LinearParams,
    Family.TREE: TreeEnsembleParams,
    Family.RANDOM_FOREST: TreeEnsembleParams,
    Family.EXTRA_TREES: TreeEnsembleParams,
    Family.GBDT: TreeEnsembleParams,
    Family.GBDT_LEAFWISE: TreeEnsembleParams,
    Family.NN: NetworkParams,
}


@dataclass(frozen=True)
class FittedModel:
    """A fitted learner. Immutable; predictions depend on the parameters only."""

    spec: LearnerSpec
    n_features: int
    params: ModelParams
    training_log: tuple[LogEntry, ...] = ()
    best_iteration: int | None = None
    feature_names: tuple[str, ...] = ()

    @property
    def family(self) -> Family:
        """The family tag."""
        return self.spec.family

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        return {
            "version": MODEL_FORMAT_VERSION,
            "spec": self.spec.to_dict(),
            "n_features": self.n_features,
            "feature_names": list(self.feature_names),
            "params": self.params.to_dict(),
            "training_log": [
                [entry.iteration, entry.train_metric, entry.valid_metric]
                for entry in self.training_log
            ],
            "best_iteration": self.best_iteration,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FittedModel":
        """Rebuild from `to_dict` output."""
        if data.get("version") != MODEL_FORMAT_VERSION:
            raise SchemaMismatch(f"Unsupported model format version {data.get('version')}.")
        spec = LearnerSpec.from_dict(data["spec"])
        return cls(
            spec=spec,
            n_features=int(data["n_features"]),
            params=_PARAMS_CLASS[spec.family].from_dict(data["params"]),
            training_log=tuple(
                LogEntry(int(it), from_json_float(train), from_json_float(valid))
                for it, train, valid in data["training_log"]
            ),
            best_iteration=data["best_iteration"],
            feature_names=tuple(data["feature_names"]),
        )


@typechecked
def fit(
    spec: LearnerSpec,
    X: np.ndarray,
    y: np.ndarray,
    validation: tuple[np.ndarray, np.ndarray] | None = None,
    feature_names: tuple[str, ...] | list[str] = (),
    jobs: int = 1,
) -> FittedModel:
    """Fit a learner.

    Args:
        spec: Family, hyperparameters and seed.
        X: n x d training features, n >= 2, d >= 1.
        y: n training targets.
        validation: Optional (X_v, y_v) for early stopping and best-epoch restoration
            of iterative families. Without it, boosted trees keep every stage on all
            rows, and the network holds out 10% of the training rows when n >= 20.
        feature_names: Names of the d columns, kept with the model.
        jobs: Worker threads for forests. Does not change the model.

    Returns:
        The fitted model.

    Raises:
        SingularSystem: Warned (not raised) for a rank-deficient linear design.
        NonFiniteLoss: If a network's training loss diverges.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 1:
        raise ValueError(f"fit needs an n x d matrix with n >= 2, d >= 1. Got {X.shape}.")
    if y.shape != (X.shape[0],):
        raise ValueError(f"y has shape {y.shape}, expected ({X.shape[0]},).")
    if feature_names and len(feature_names) != X.shape[1]:
        raise ValueError(f"{len(feature_names)} feature names for {X.shape[1]} columns.")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("fit needs finite features and targets.")

    hp = resolve_hyperparameters(spec.family, spec.hyperparameters)
    training_log: tuple[LogEntry, ...] = ()
    best_iteration = None
    params: ModelParams
    match spec.family:
        case Family.BASELINE:
            params = ConstantParams(value=float(y.mean()))
        case Family.LINEAR:
            intercept, coef, rank = fit_least_squares(X, y)
            params = LinearParams(intercept=intercept, coef=coef, rank=rank)
        case Family.TREE:
            tree = grow_tree(
                X,
                y,
                max_depth=hp["max_depth"],
                min_samples_split=hp["min_samples_split"],
                min_samples_leaf=hp["min_samples_leaf"],
            )
            params = TreeEnsembleParams(init=0.0, weight=1.0, trees=(tree,))
        case Family.RANDOM_FOREST | Family.EXTRA_TREES:
            trees = fit_forest(
                X,
                y,
                n_estimators=hp["n_estimators"],
                max_depth=hp["max_depth"],
                min_samples_split=hp["min_samples_split"],
                min_samples_leaf=hp["min_samples_leaf"],
                max_features=float(hp["max_features"]),
                bootstrap=spec.family == Family.RANDOM_FOREST,
                random_splits=spec.family == Family.EXTRA_TREES,
                seed=spec.seed,
                jobs=jobs,
            )
            params = TreeEnsembleParams(init=0.0, weight=1.0 / len(trees), trees=trees)
        case Family.GBDT | Family.GBDT_LEAFWISE:
            leafwise = spec.family == Family.GBDT_LEAFWISE
            boosted, training_log, best_iteration = fit_gbdt(
                X,
                y,
                n_estimators=hp["n_estimators"],
                learning_rate=float(hp["learning_rate"]),
                max_depth=hp["max_depth"],
                num_leaves=hp["num_leaves"],
                min_child_weight=float(hp["min_child_weight"]),
                min_data_in_leaf=hp["min_data_in_leaf"],
                subsample=float(hp["bagging_fraction" if leafwise else "subsample"]),
                colsample=float(hp["colsample"]),
                reg_lambda=float(hp["reg_lambda"]),
                early_stopping_rounds=hp["early_stopping_rounds"],
                seed=spec.seed,
                validation=validation,
            )
            params = TreeEnsembleParams(
                init=boosted.init, weight=boosted.learning_rate, trees=boosted.trees
            )
        case Family.NN:
            weights, training_log, best_iteration = fit_network(
                X,
                y,
                dense1=hp["dense1"],
                dense2=hp["dense2"],
                dropout=float(hp["dropout"]),
                learning_rate=float(hp["learning_rate"]),
                momentum=float(hp["momentum"]),
                decay=float(hp["decay"]),
                epochs=hp["epochs"],
                batch_size=hp["batch_size"],
                seed=spec.seed,
                validation=validation,
            )
            params = NetworkParams(weights=weights)

    return FittedModel(
        spec=spec,
        n_features=X.shape[1],
        params=params,
        training_log=training_log,
        best_iteration=best_iteration,
        feature_names=tuple(feature_names),
    )


@typechecked
def predict(m: FittedModel, X: np.ndarray) -> np.ndarray:
    """Predict with a fitted model. Deterministic; network dropout is off.

    Raises:
        WidthMismatch: If X has another column count than the training matrix.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != m.n_features:
        raise WidthMismatch(
            f"Model expects {m.n_features} features. Got shape {X.shape}."
        )
    return np.asarray(m.params.predict(X), dtype=np.float64)


@schema_error_handler
@pa.check_types(lazy=True)
def learning_curve(m: FittedModel) -> DataFrame[LearningCurve]:
    """Per-iteration training and validation RMSE of an iterative model.

    The best iteration is the earliest minimum of the validation RMSE, or the last
    iteration when there was no validation.

    Raises:
        NotIterative: If the model's family is not gbdt, gbdt_leafwise or nn.
    """
    if m.family not in ITERATIVE_FAMILIES:
        raise NotIterative(f"{m.family} models have no learning curve.")
    return pd.DataFrame(
        {
            TableColumns.ITERATION: [entry.iteration for entry in m.training_log],
            TableColumns.TRAIN_METRIC: [entry.train_metric for entry in m.training_log],
            TableColumns.VALID_METRIC: [entry.valid_metric for entry in m.training_log],
            TableColumns.BEST_ITERATION: m.best_iteration,
        }
    )


@typechecked
def model_json(m: FittedModel) -> str:
    """The model's serialization, as written by `save_model`."""
    return json.dumps(to_jsonable(m.to_dict()), sort_keys=True)


@typechecked
def save_model(m: FittedModel, path: Path) -> Path:
    """Write a model as versioned JSON."""
    return dump_json(m.to_dict(), path)


@typechecked
def load_model(path: Path) -> FittedModel:
    """Read a model written by `save_model`."""
    return FittedModel.from_dict(load_json(path))

