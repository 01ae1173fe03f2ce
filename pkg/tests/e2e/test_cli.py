"""End-to-end tests of the command line."""

import subprocess
from pathlib import Path

import pandas as pd
import pytest
from click.testing import CliRunner
from typeguard import typechecked

from fatigue_automl.cli.main import cli
from fatigue_automl.lib.constants import (
    COMPARISON_FILE,
    EdaFiles,
    ExplainFiles,
    RunFiles,
    SynthFiles,
)
from fatigue_automl.lib.reporting.run_dir import read_manifest
from fatigue_automl.lib.utils import load_json
from tests.e2e.utils import write_config


class TestEda:
    """Test the eda command."""

    @typechecked
    def test_writes_tables(
        self, cli_runner: CliRunner, small_config: Path, tmp_path: Path
    ) -> None:
        """EDA of the synthetic table writes its tables and manifest."""
        out = tmp_path / "eda"
        result = cli_runner.invoke(
            cli, ["eda", "--config", str(small_config), "--output-dir", str(out)]
        )
        assert result.exit_code == 0, result.output
        for name in (EdaFiles.MISSINGNESS, EdaFiles.STATS, EdaFiles.VIOLATIONS):
            assert (out / name).is_file()
        assert list(out.glob(f"{EdaFiles.HIST_PREFIX}*.csv"))
        assert (out / RunFiles.MANIFEST).is_file()

    @typechecked
    def test_missing_input(self, cli_runner: CliRunner, tmp_path: Path) -> None:
        """An absent input CSV fails with its path in the message."""
        config = write_config(tmp_path / "cfg", input_csv="absent.csv")
        result = cli_runner.invoke(
            cli, ["eda", "--config", str(config), "--output-dir", str(tmp_path / "eda")]
        )
        assert result.exit_code != 0
        assert "absent.csv" in result.output

    @typechecked
    def test_console_script(self, small_config: Path, tmp_path: Path) -> None:
        """The installed script runs."""
        result = subprocess.run(
            ["fatigue_eda", "--config", str(small_config), "--output-dir", str(tmp_path)],
            capture_output=True,
        )
        assert result.returncode == 0


@typechecked
def test_synth(cli_runner: CliRunner, small_config: Path, tmp_path: Path) -> None:
    """synth writes the table and its ground truth."""
    result = cli_runner.invoke(
        cli,
        ["synth", "--config", str(small_config), "--output-dir", str(tmp_path / "s")],
    )
    assert result.exit_code == 0, result.output
    data = pd.read_csv(tmp_path / "s" / SynthFiles.DATA)
    assert len(data) == 150
    assert (tmp_path / "s" / SynthFiles.GROUND_TRUTH).is_file()


class TestTrain:
    """Test the train command."""

    @typechecked
    def test_artifacts(self, trained_run: Path) -> None:
        """A finished run holds its tables, models and metrics."""
        for name in (
            RunFiles.CONFIG_ECHO,
            RunFiles.SPLIT,
            RunFiles.PIPELINE,
            RunFiles.LEADERBOARD,
            RunFiles.ENSEMBLE,
            RunFiles.METRICS,
            RunFiles.METRICS_TABLE,
            RunFiles.PARITY_TRAIN,
            RunFiles.PARITY_TEST,
            RunFiles.TIMINGS,
            ExplainFiles.DECISIONS,
        ):
            assert (trained_run / name).is_file(), name
        assert not (trained_run / RunFiles.FAILED_MARKER).exists()
        leaderboard = pd.read_csv(trained_run / RunFiles.LEADERBOARD)
        assert len(leaderboard) == 4
        metrics = load_json(trained_run / RunFiles.METRICS)
        assert metrics["hypothesis"] == "M1"
        assert metrics["search"]["n_trials"] == 4
        assert set(metrics["test"]["full"]) >= {"rmse", "r2"}
        assert list((trained_run / RunFiles.MODELS_DIR).glob("trial_*.json"))

    @typechecked
    def test_rerun_same_manifest(
        self, cli_runner: CliRunner, small_config: Path, trained_run: Path, tmp_path: Path
    ) -> None:
        """A rerun with the same config writes the same bytes."""
        rerun = tmp_path / "second"
        result = cli_runner.invoke(
            cli,
            ["train", "--config", str(small_config), "--output-dir", str(rerun)]
            + ["--jobs", "2"],
        )
        assert result.exit_code == 0, result.output
        assert read_manifest(rerun) == {
            name: digest
            for name, digest in read_manifest(trained_run).items()
            if not name.startswith("explain_")
        }

    @typechecked
    def test_output_dir_not_empty(
        self, cli_runner: CliRunner, small_config: Path, trained_run: Path
    ) -> None:
        """A used run directory is refused."""
        result = cli_runner.invoke(
            cli, ["train", "--config", str(small_config), "--output-dir", str(trained_run)]
        )
        assert result.exit_code != 0
        assert "not empty" in result.output

    @typechecked
    def test_missing_input_marks_failure(self, cli_runner: CliRunner, tmp_path: Path) -> None:
        """An ingest failure leaves a FAILED marker naming the stage."""
        config = write_config(tmp_path / "cfg", input_csv="absent.csv")
        out = tmp_path / "run"
        result = cli_runner.invoke(
            cli, ["train", "--config", str(config), "--output-dir", str(out)]
        )
        assert result.exit_code != 0
        assert "absent.csv" in result.output
        marker = (out / RunFiles.FAILED_MARKER).read_text(encoding="utf-8")
        assert marker.startswith("stage: ingest")
        assert (out / RunFiles.MANIFEST).is_file()


class TestExplain:
    """Test the explain command."""

    @typechecked
    def test_ensemble(
        self, cli_runner: CliRunner, small_config: Path, trained_run: Path, tmp_path: Path
    ) -> None:
        """Explaining the ensemble writes ten best and ten worst decisions."""
        out = tmp_path / "explained"
        result = cli_runner.invoke(
            cli,
            [
                "explain",
                "--config",
                str(small_config),
                "--model-path",
                str(trained_run / RunFiles.ENSEMBLE),
                "--output-dir",
                str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        decisions = pd.read_csv(out / ExplainFiles.DECISIONS)
        assert len(decisions) == 20
        assert decisions["kind"].tolist() == ["best"] * 10 + ["worst"] * 10
        for name in (
            ExplainFiles.SHAP_VALUES,
            ExplainFiles.SHAP_IMPORTANCE,
            ExplainFiles.PERMUTATION,
            ExplainFiles.BEESWARM_SVG,
            f"{ExplainFiles.PARITY_SVG_PREFIX}test.svg",
        ):
            assert (out / name).is_file(), name
        shap = pd.read_csv(out / ExplainFiles.SHAP_VALUES)
        assert len(shap) == 15

    @typechecked
    def test_member_default_dir(
        self, cli_runner: CliRunner, small_config: Path, trained_run: Path
    ) -> None:
        """A member file explains into explain_<stem> of its run."""
        member = sorted((trained_run / RunFiles.MODELS_DIR).glob("trial_*.json"))[0]
        result = cli_runner.invoke(
            cli, ["explain", "--config", str(small_config), "--model-path", str(member)]
        )
        assert result.exit_code == 0, result.output
        assert (trained_run / f"explain_{member.stem}" / ExplainFiles.DECISIONS).is_file()

    @typechecked
    def test_absent_model(
        self, cli_runner: CliRunner, small_config: Path, tmp_path: Path
    ) -> None:
        """An absent model file fails with its path."""
        model = tmp_path / "nothing.json"
        result = cli_runner.invoke(
            cli, ["explain", "--config", str(small_config), "--model-path", str(model)]
        )
        assert result.exit_code != 0
        assert "nothing.json" in result.output


class TestReport:
    """Test the report command."""

    @typechecked
    def test_comparison(
        self, cli_runner: CliRunner, trained_run: Path, tmp_path: Path
    ) -> None:
        """One run gives a full and a band column."""
        result = cli_runner.invoke(
            cli,
            ["report", "--run-dir", str(trained_run), "--output-dir", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        comparison = pd.read_csv(tmp_path / COMPARISON_FILE)
        assert f"{trained_run.name}:M1 full" in comparison.columns
        assert f"{trained_run.name}:M1 band" in comparison.columns

    @pytest.mark.parametrize("run_dirs", [[], ["absent_run"]])
    @typechecked
    def test_bad_runs(
        self, cli_runner: CliRunner, tmp_path: Path, run_dirs: list[str]
    ) -> None:
        """No run, or a run without metrics, fails."""
        args = ["report", "--output-dir", str(tmp_path)]
        for run_dir in run_dirs:
            args += ["--run-dir", str(tmp_path / run_dir)]
        result = cli_runner.invoke(cli, args)
        assert result.exit_code != 0
