"""Helpers shared by the unit tests."""

import numpy as np
from typeguard import typechecked

from fatigue_automl.lib.constants import ColumnKind
from fatigue_automl.lib.tabular.dataset import Dataset
from fatigue_automl.lib.tabular.feature_schema import ColumnSpec, FeatureSchema


@typechecked
def toy_schema(reals: tuple[str, ...] = ("a", "b"), target: str = "y") -> FeatureSchema:
    """A schema of real features in mm plus a real target in MPa."""
    return FeatureSchema(
        columns=tuple(ColumnSpec(name, ColumnKind.REAL, unit="mm") for name in reals)
        + (ColumnSpec(target, ColumnKind.REAL, unit="MPa", low=0.0, high=1000.0),),
        target_names=(target,),
    )


@typechecked
def toy_dataset(columns: dict[str, np.ndarray], target: str = "y") -> Dataset:
    """A dataset of real columns, with `target` as the target."""
    reals = tuple(name for name in columns if name != target)
    return Dataset.from_arrays(schema=toy_schema(reals, target), values=columns)
