"""The deployable result of a run: pipeline, golden features and ensemble."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from typeguard import typechecked

from fatigue_automl.lib.automl.ensemble import EnsembleModel
from fatigue_automl.lib.constants import RunFiles
from fatigue_automl.lib.errors import SchemaMismatch
from fatigue_automl.lib.features.golden import GoldenAugmenter
from fatigue_automl.lib.learners.model import FittedModel
from fatigue_automl.lib.preprocess.pipeline import (
    FittedPipeline,
    encode_features,
    inverse_target,
    load_pipeline,
    standardize,
    target_values,
    transform_target,
)
from fatigue_automl.lib.tabular.dataset import Dataset
from fatigue_automl.lib.utils import load_json

_AUGMENTER_KEY = "augmenter"


@dataclass(frozen=True)
class ModelBundle:
    """Maps datasets to model inputs and model outputs back to MPa.

    Model inputs are the standardized encoded features followed by the standardized
    golden feature columns. Model outputs live on the standardized Yeo-Johnson scale of
    log10 strength.
    """

    pipeline: FittedPipeline
    augmenter: GoldenAugmenter
    model: EnsembleModel

    def __post_init__(self) -> None:
        """Check the model width against the inputs."""
        if self.model.n_features != len(self.feature_names):
            raise SchemaMismatch(
                f"Model takes {self.model.n_features} features; pipeline and golden "
                f"features give {len(self.feature_names)}."
            )

    @property
    def feature_names(self) -> list[str]:
        """Names of the model inputs."""
        return [*self.pipeline.feature_names, *self.augmenter.names]

    def features(self, ds: Dataset) -> np.ndarray:
        """Model input matrix of a dataset."""
        raw, names = encode_features(self.pipeline, ds, self.pipeline.seed)
        golden = self.augmenter.transform(raw, names)
        return np.hstack([standardize(self.pipeline, raw), golden])

    def target(self, ds: Dataset) -> np.ndarray:
        """Model-scale target of a dataset."""
        return transform_target(self.pipeline, target_values(self.pipeline, ds))

    def predict(self, ds: Dataset) -> np.ndarray:
        """Model-scale predictions."""
        return self.model.predict(self.features(ds))

    def predict_mpa(self, ds: Dataset) -> np.ndarray:
        """Predictions in MPa."""
        return inverse_target(self.pipeline, self.predict(ds))

    def actual_mpa(self, ds: Dataset) -> np.ndarray:
        """The observed target in MPa."""
        return target_values(self.pipeline, ds)


@typechecked
def load_model_file(path: Path) -> EnsembleModel:
    """Read an ensemble file, or a single model file as a one-member ensemble."""
    data = load_json(path)
    if "members" in data:
        return EnsembleModel.from_dict(data)
    return EnsembleModel(members=(FittedModel.from_dict(data),), weights=(1.0,))


@typechecked
def run_dir_of(model_path: Path) -> Path:
    """The run directory holding a model file (models/ files sit one level down)."""
    parent = model_path.parent
    return parent.parent if parent.name == RunFiles.MODELS_DIR else parent


@typechecked
def load_bundle(root: Path, model_path: Path | None = None) -> ModelBundle:
    """Read the bundle of a run directory.

    The golden features file is optional; without it no golden columns are added.

    Args:
        root: The run directory.
        model_path: Model file to use instead of the run's ensemble.
    """
    golden_path = root / RunFiles.GOLDEN_FEATURES
    augmenter = GoldenAugmenter(features=(), mean=(), std=())
    if golden_path.exists():
        augmenter = GoldenAugmenter.from_dict(load_json(golden_path)[_AUGMENTER_KEY])
    return ModelBundle(
        pipeline=load_pipeline(root / RunFiles.PIPELINE),
        augmenter=augmenter,
        model=load_model_file(root / RunFiles.ENSEMBLE if model_path is None else model_path),
    )


@typechecked
def golden_document(augmenter: GoldenAugmenter, candidates: list[dict]) -> dict:
    """Contents of the golden features file: the fitted augmenter and every candidate."""
    return {_AUGMENTER_KEY: augmenter.to_dict(), "candidates": candidates}
