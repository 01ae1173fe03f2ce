"""End-to-end recovery of the planted synthetic strength formula."""

from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from typeguard import typechecked

from fatigue_automl import train
from fatigue_automl.lib.constants import (
    Columns,
    ExplainFiles,
    PostTreatment,
    RunFiles,
    TableColumns,
)
from fatigue_automl.lib.synth.generator import SynthConfig, generate_synthetic
from fatigue_automl.lib.utils import load_json
from tests.e2e.utils import write_recovery_config

TIG = f"{Columns.POST_TREAT}={PostTreatment.TIG_DRESSING}"


@pytest.fixture(scope="module")
@typechecked
def recovery_run(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """A full run on 3000 low-noise synthetic rows."""
    config = write_recovery_config(tmp_path_factory.mktemp("recovery_config"))
    return train(
        config_path=config, output_dir=tmp_path_factory.mktemp("recovery") / "run"
    )


@pytest.mark.slow
class TestSyntheticRecovery:
    """Test that a full run recovers the planted formula."""

    @typechecked
    def test_test_r2(self, recovery_run: Path) -> None:
        """The held-out rows are predicted with R^2 of at least 0.9."""
        metrics = load_json(recovery_run / RunFiles.METRICS)
        assert metrics["search"]["n_trials"] == 30
        assert metrics["test"]["full"]["r2"] >= 0.9

    @typechecked
    def test_ensemble_beats_best_trial(self, recovery_run: Path) -> None:
        """The ensemble's out-of-fold RMSE is at most the best single trial's."""
        history = load_json(recovery_run / RunFiles.METRICS)["ensemble"]["history"]
        assert np.all(np.diff(history) < 0)
        assert history[-1] <= history[0]

    @typechecked
    def test_stress_ratio_ranks_first(self, recovery_run: Path) -> None:
        """The stress ratio, the largest planted effect, has the largest mean |SHAP|."""
        importance = pd.read_csv(recovery_run / ExplainFiles.SHAP_IMPORTANCE)
        top = importance.sort_values(TableColumns.RANK).iloc[0]
        assert top[TableColumns.FEATURE] == Columns.STRESS_RATIO

    @typechecked
    def test_attribution_signs(self, recovery_run: Path) -> None:
        """TIG dressing pushes treated rows up and a high stress ratio pushes rows down."""
        shap = pd.read_csv(recovery_run / ExplainFiles.SHAP_VALUES)
        ds = generate_synthetic(SynthConfig(n_rows=3000, noise_std_log10=0.02, seed=0))
        row_ids = shap[TableColumns.ROW_ID].to_numpy()
        stress_ratio = np.asarray(ds.column(Columns.STRESS_RATIO).data, dtype=float)[row_ids]
        treated = np.asarray(ds.column(Columns.POST_TREAT).data)[row_ids] == (
            PostTreatment.TIG_DRESSING
        )

        assert treated.any()
        assert shap.loc[treated, TIG].mean() > 0
        high_ratio = stress_ratio > 0.5
        assert high_ratio.any()
        assert shap.loc[high_ratio, Columns.STRESS_RATIO].mean() < 0
