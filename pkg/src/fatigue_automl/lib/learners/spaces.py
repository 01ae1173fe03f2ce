"""Hyperparameter domains and search spaces of the learner families.

A domain says which values a family accepts at fit time. A search space says which values
the random search samples. Every space lies inside its domain.
"""

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import Any, Final

import numpy as np
from typeguard import typechecked

from fatigue_automl.lib.constants import EARLY_STOPPING_ROUNDS, Family, GbdtPreset
from fatigue_automl.lib.errors import InvalidHyperparameter


@dataclass(frozen=True)
class IntRange:
    """Integers in the closed range [low, high], optionally sampled log-uniformly."""

    low: int
    high: int
    log: bool = False

    def sample(self, rng: np.random.Generator) -> int:
        """Draw one value."""
        if self.log:
            draw = math.exp(rng.uniform(math.log(self.low), math.log(self.high + 1)))
            return min(self.high, max(self.low, int(math.floor(draw))))
        return int(rng.integers(self.low, self.high + 1))

    def contains(self, value: Any) -> bool:
        """Whether a value lies in the range."""
        return _is_int(value) and self.low <= value <= self.high


@dataclass(frozen=True)
class FloatRange:
    """Reals in the closed range [low, high], sampled uniformly."""

    low: float
    high: float

    def sample(self, rng: np.random.Generator) -> float:
        """Draw one value."""
        return float(rng.uniform(self.low, self.high))

    def contains(self, value: Any) -> bool:
        """Whether a value lies in the range."""
        return _is_real(value) and self.low <= value <= self.high


@dataclass(frozen=True)
class Choice:
    """One of a fixed set of options."""

    options: tuple[Any, ...]

    def sample(self, rng: np.random.Generator) -> Any:
        """Draw one value."""
        return self.options[int(rng.integers(len(self.options)))]

    def contains(self, value: Any) -> bool:
        """Whether a value is one of the options."""
        return value in self.options


@dataclass(frozen=True)
class Fixed:
    """A single value."""

    value: Any

    def sample(self, rng: np.random.Generator) -> Any:  # noqa: ARG002
        """Return the value."""
        return self.value

    def contains(self, value: Any) -> bool:
        """Whether a value equals the fixed one."""
        return value == self.value


Param = IntRange | FloatRange | Choice | Fixed
SearchSpace = Mapping[str, Param]


def _is_int(value: Any) -> bool:
    return isinstance(value, int | np.integer) and not isinstance(value, bool)


def _is_real(value: Any) -> bool:
    return _is_int(value) or (
        isinstance(value, float | np.floating) and math.isfinite(float(value))
    )


def _positive_int(value: Any) -> bool:
    return _is_int(value) and value >= 1


def _positive_int_or_none(value: Any) -> bool:
    return value is None or _positive_int(value)


def _fraction(value: Any) -> bool:
    return _is_real(value) and 0 < value <= 1


def _non_negative(value: Any) -> bool:
    return _is_real(value) and value >= 0


# Fit-time domains, by hyperparameter name.
DOMAINS: Final[dict[str, tuple[Callable[[Any], bool], str]]] = {
    "batch_size": (_positive_int, "an integer >= 1"),
    "bagging_fraction": (_fraction, "a real in (0, 1]"),
    "colsample": (_fraction, "a real in (0, 1]"),
    "decay": (_non_negative, "a real >= 0"),
    "dense1": (_positive_int, "an integer >= 1"),
    "dense2": (_positive_int, "an integer >= 1"),
    "dropout": (lambda v: _is_real(v) and 0 <= v < 1, "a real in [0, 1)"),
    "early_stopping_rounds": (_positive_int_or_none, "an integer >= 1 or None"),
    "epochs": (_positive_int, "an integer >= 1"),
    "learning_rate": (lambda v: _is_real(v) and 0 < v <= 1, "a real in (0, 1]"),
    "max_depth": (_positive_int_or_none, "an integer >= 1 or None"),
    "max_features": (_fraction, "a real in (0, 1]"),
    "min_child_weight": (_non_negative, "a real >= 0"),
    "min_data_in_leaf": (_positive_int, "an integer >= 1"),
    "min_samples_leaf": (_positive_int, "an integer >= 1"),
    "min_samples_split": (lambda v: _is_int(v) and v >= 2, "an integer >= 2"),
    "momentum": (lambda v: _is_real(v) and 0 <= v < 1, "a real in [0, 1)"),
    "n_estimators": (_positive_int, "an integer >= 1"),
    "num_leaves": (lambda v: v is None or (_is_int(v) and v >= 2), "an integer >= 2 or None"),
    "reg_lambda": (_non_negative, "a real >= 0"),
    "subsample": (_fraction, "a real in (0, 1]"),
}

_TREE_NAMES = ("max_depth", "min_samples_leaf", "min_samples_split")
_FOREST_NAMES = (*_TREE_NAMES, "n_estimators", "max_features")
_GBDT_NAMES = (
    "bagging_fraction",
    "colsample",
    "early_stopping_rounds",
    "learning_rate",
    "max_depth",
    "min_child_weight",
    "min_data_in_leaf",
    "n_estimators",
    "num_leaves",
    "reg_lambda",
    "subsample",
)
_NN_NAMES = (
    "batch_size",
    "decay",
    "dense1",
    "dense2",
    "dropout",
    "epochs",
    "learning_rate",
    "momentum",
)

ALLOWED_NAMES: Final[dict[Family, tuple[str, ...]]] = {
    Family.BASELINE: (),
    Family.LINEAR: (),
    Family.TREE: _TREE_NAMES,
    Family.RANDOM_FOREST: _FOREST_NAMES,
    Family.EXTRA_TREES: _FOREST_NAMES,
    Family.GBDT: _GBDT_NAMES,
    Family.GBDT_LEAFWISE: _GBDT_NAMES,
    Family.NN: _NN_NAMES,
}

# Fit-time defaults for names a spec leaves out.
DEFAULTS: Final[dict[Family, dict[str, Any]]] = {
    Family.BASELINE: {},
    Family.LINEAR: {},
    Family.TREE: {"max_depth": None, "min_samples_leaf": 1, "min_samples_split": 2},
    Family.RANDOM_FOREST: {
        "n_estimators": 100,
        "max_depth": None,
        "min_samples_split": 2,
        "min_samples_leaf": 1,
        "max_features": 1.0,
    },
    Family.EXTRA_TREES: {
        "n_estimators": 100,
        "max_depth": None,
        "min_samples_split": 2,
        "min_samples_leaf": 1,
        "max_features": 1.0,
    },
    Family.GBDT: {
        "n_estimators": 100,
        "learning_rate": 0.1,
        "max_depth": 6,
        "num_leaves": None,
        "min_child_weight": 1.0,
        "min_data_in_leaf": 1,
        "subsample": 1.0,
        "colsample": 1.0,
        "reg_lambda": 1.0,
        "early_stopping_rounds": EARLY_STOPPING_ROUNDS,
    },
    Family.GBDT_LEAFWISE: {
        "n_estimators": 100,
        "learning_rate": 0.1,
        "max_depth": None,
        "num_leaves": 31,
        "min_child_weight": 1.0,
        "min_data_in_leaf": 20,
        "bagging_fraction": 1.0,
        "colsample": 1.0,
        "reg_lambda": 1.0,
        "early_stopping_rounds": EARLY_STOPPING_ROUNDS,
    },
    Family.NN: {
        "dense1": 32,
        "dense2": 16,
        "dropout": 0.1,
        "learning_rate": 0.05,
        "momentum": 0.9,
        "decay": 1e-3,
        "epochs": 200,
        "batch_size": 32,
    },
}

SPACES: Final[dict[tuple[Family, GbdtPreset | None], SearchSpace]] = {
    (Family.BASELINE, None): {},
    (Family.LINEAR, None): {},
    (Family.TREE, None): {
        "max_depth": IntRange(2, 12),
        "min_samples_leaf": IntRange(1, 20),
    },
    (Family.RANDOM_FOREST, None): {
        "n_estimators": Fixed(100),
        "max_depth": IntRange(4, 12),
        "min_samples_split": Fixed(2),
        "max_features": FloatRange(0.5, 1.0),
    },
    (Family.EXTRA_TREES, None): {
        "n_estimators": Fixed(100),
        "max_depth": IntRange(4, 12),
        "min_samples_split": IntRange(10, 50),
        "min_samples_leaf": Fixed(1),
        "max_features": FloatRange(0.5, 1.0),
    },
    (Family.GBDT_LEAFWISE, None): {
        "num_leaves": IntRange(3, 31),
        "learning_rate": Choice((0.05, 0.075, 0.1, 0.15)),
        "bagging_fraction": Choice((0.8, 0.9, 1.0)),
        "min_data_in_leaf": IntRange(5, 50),
        "n_estimators": IntRange(50, 500, log=True),
    },
    (Family.GBDT, GbdtPreset.REGULARIZED): {
        "max_depth": IntRange(1, 4),
        "min_child_weight": IntRange(1, 10),
        "n_estimators": IntRange(10, 100),
        "learning_rate": FloatRange(0.01, 0.5),
        "subsample": FloatRange(0.3, 1.0),
        "early_stopping_rounds": Fixed(EARLY_STOPPING_ROUNDS),
    },
    (Family.GBDT, GbdtPreset.CATEGORICAL): {
        "max_depth": IntRange(2, 6),
        "learning_rate": Choice((0.05, 0.1, 0.2)),
        "n_estimators": Fixed(1000),
        "colsample": FloatRange(0.7, 1.0),
        "min_data_in_leaf": IntRange(5, 50),
    },
    (Family.NN, None): {
        "dense1": Choice((16, 32, 64)),
        "dense2": Choice((4, 8, 16, 32)),
        "dropout": Choice((0.0, 0.1, 0.25)),
        "learning_rate": Choice((0.01, 0.05, 0.08, 0.1)),
        "momentum": Choice((0.85, 0.9, 0.95)),
        "decay": Choice((0.0001, 0.001, 0.01)),
    },
}


@typechecked
def search_space(family: Family | str, preset: GbdtPreset | str | None = None) -> SearchSpace:
    """The search space of a family (and gbdt preset)."""
    family = Family(family)
    if family == Family.GBDT:
        preset = GbdtPreset(preset or GbdtPreset.REGULARIZED)
    elif preset is not None:
        raise ValueError(f"Only the {Family.GBDT} family has presets. Got {preset!r}.")
    return SPACES[(family, preset)]


@typechecked
def sample_hyperparameters(
    family: Family | str, preset: GbdtPreset | str | None, rng: np.random.Generator
) -> dict[str, Any]:
    """Draw one hyperparameter set from a family's search space.

    Names are drawn in sorted order, so the draw sequence depends on the space only.
    """
    space = search_space(family, preset)
    return {name: space[name].sample(rng) for name in sorted(space)}


@typechecked
def validate_hyperparameters(
    family: Family | str, hyperparameters: Mapping[str, Any]
) -> None:
    """Check hyperparameter names and values against a family's domain.

    Raises:
        InvalidHyperparameter: On an unknown name or a value outside the domain.
    """
    family = Family(family)
    allowed = ALLOWED_NAMES[family]
    for name, value in hyperparameters.items():
        if name not in allowed:
            raise InvalidHyperparameter(
                f"{family}: unknown hyperparameter {name!r}. Allowed: {list(allowed)}."
            )
        check, description = DOMAINS[name]
        if not check(value):
            raise InvalidHyperparameter(
                f"{family}: {name} must be {description}. Got {value!r}."
            )


@typechecked
def resolve_hyperparameters(
    family: Family | str, hyperparameters: Mapping[str, Any]
) -> dict[str, Any]:
    """Family defaults overlaid with the given hyperparameters."""
    return {**DEFAULTS[Family(family)], **hyperparameters}
