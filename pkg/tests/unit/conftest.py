"""Conftest for unit tests."""

from pathlib import Path

import pytest
from typeguard import typechecked

from fatigue_automl.lib.synth.generator import SynthConfig, generate_synthetic
from fatigue_automl.lib.tabular.dataset import Dataset


@pytest.fixture(scope="module")
@typechecked
def synthetic_ds() -> Dataset:
    """A small synthetic dataset on the default schema."""
    return generate_synthetic(SynthConfig(n_rows=60, seed=3))


@pytest.fixture(scope="module")
@typechecked
def synthetic_csv(tmp_path_factory: pytest.TempPathFactory, synthetic_ds: Dataset) -> Path:
    """The small synthetic dataset written as CSV."""
    path = tmp_path_factory.mktemp("synthetic_csv", numbered=True) / "synthetic.csv"
    synthetic_ds.to_frame().to_csv(path, index=False, na_rep="", encoding="utf-8")
    return path

