"""Conftest for end-to-end tests."""

from pathlib import Path

import pytest
from click.testing import CliRunner
from typeguard import typechecked

from fatigue_automl import train
from tests.e2e.utils import write_config


@pytest.fixture()
@typechecked
def cli_runner() -> CliRunner:
    """Get a CliRunner."""
    return CliRunner()


@pytest.fixture(scope="module")
@typechecked
def small_config(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """A small synthetic run config."""
    return write_config(tmp_path_factory.mktemp("config", numbered=True))


@pytest.fixture(scope="module")
@typechecked
def trained_run(tmp_path_factory: pytest.TempPathFactory, small_config: Path) -> Path:
    """A finished run of the small config."""
    return train(
        config_path=small_config,
        output_dir=tmp_path_factory.mktemp("runs", numbered=True) / "first",
    )
