"""Unit tests for run config files."""

import logging
from dataclasses import replace
from pathlib import Path

import pytest
from typeguard import typechecked

from fatigue_automl.lib.config import config_echo, load_config, with_overrides
from fatigue_automl.lib.constants import AuditPolicy, ExplainRows, Hypothesis
from fatigue_automl.lib.errors import ConfigError

REPO_CONFIG = Path(__file__).parents[2] / "config.ini"


@typechecked
def _write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "run.ini"
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadConfig:
    """Test load_config."""

    @typechecked
    def test_repo_config(self) -> None:
        """The shipped example config parses."""
        config = load_config(REPO_CONFIG)
        assert config.input_csv is None
        assert config.output_dir == REPO_CONFIG.resolve().parent / "runs" / "synthetic_m1"
        assert config.options.hypothesis == Hypothesis.M1
        assert config.options.max_trials == 60
        assert config.options.band == (0.0, 150.0)
        assert config.synth.missing_rates == {"R_eH_filler": 0.2, "R_m_filler": 0.2}

    @typechecked
    def test_values(self, tmp_path: Path) -> None:
        """Sections map onto the run options."""
        path = _write(
            tmp_path,
            "[paths]\ninput_csv = data/t.csv\noutput_dir = out\nschema =\n"
            "[run]\nhypothesis = M3\nfamilies = linear, gbdt:categorical\n"
            "vif_threshold = none\ngolden_policy = lenient\nmax_trials = 7\n"
            "[seeds]\nsplit = 1\npipeline = 2\nsearch = 3\nexplain = 4\n"
            "[explain]\nrows = train\ntop_k = 3\n"
            "[impute]\nR_eH = random_sample\n",
        )
        config = load_config(path)
        assert config.input_csv == (tmp_path / "data" / "t.csv").resolve()
        assert config.schema_path is None
        options = config.options
        assert options.hypothesis == Hypothesis.M3
        assert options.families == ("linear", "gbdt:categorical")
        assert options.vif_threshold is None
        assert options.golden_policy == AuditPolicy.LENIENT
        assert (config.split_seed, options.pipeline_seed, options.search_seed) == (1, 2, 3)
        assert options.explain is not None
        assert options.explain.rows == ExplainRows.TRAIN
        assert (options.explain.top_k, options.explain.seed) == (3, 4)
        assert [spec.column for spec in options.impute] == ["R_eH"]

    @typechecked
    def test_explain_disabled(self, tmp_path: Path) -> None:
        """enabled = false skips the explain stage."""
        config = load_config(_write(tmp_path, "[explain]\nenabled = false\n"))
        assert config.options.explain is None

    @typechecked
    def test_defaults_warn(self, tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
        """Absent path and seed keys fall back to defaults with a warning."""
        with caplog.at_level(logging.WARNING):
            config = load_config(_write(tmp_path, "[run]\nfolds = 3\n"))
        assert config.options.folds == 3
        assert config.output_dir == tmp_path.resolve() / "run"
        assert "[seeds] split" in caplog.text

    @pytest.mark.parametrize(
        "text, match",
        [
            ("[run]\nfold = 3\n", "Unknown keys"),
            ("[trainer]\nx = 1\n", "Unknown config section"),
            ("[run]\nfolds = three\n", "folds"),
            ("[run]\ngolden = maybe\n", "golden"),
            ("[run]\nhypothesis = M9\n", "Invalid config"),
            ("[evaluation]\nband_low = 200\nband_high = 100\n", "low < high"),
            ("[impute]\nR_eH = mode\n", ""),
            ("[synth]\nmissing_rates = R_eH\n", "missing_rates"),
        ],
    )
    @typechecked
    def test_invalid(self, tmp_path: Path, text: str, match: str) -> None:
        """Bad sections, keys and values raise ConfigError."""
        with pytest.raises(ConfigError, match=match):
            load_config(_write(tmp_path, text))

    @typechecked
    def test_missing_file(self, tmp_path: Path) -> None:
        """An absent file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "absent.ini")


class TestOverrides:
    """Test with_overrides."""

    @typechecked
    def test_seed_replaces_every_seed(self) -> None:
        """A seed override reaches split, pipeline, search, explain and synth."""
        config = with_overrides(load_config(REPO_CONFIG), seed_override=9)
        options = config.options
        assert config.split_seed == 9
        assert config.synth.seed == 9
        assert (options.pipeline_seed, options.search_seed) == (9, 9)
        assert options.explain is not None and options.explain.seed == 9

    @typechecked
    def test_jobs_budget_output(self, tmp_path: Path) -> None:
        """Jobs, budget and output directory overrides."""
        config = with_overrides(
            load_config(REPO_CONFIG), jobs=4, budget_seconds=5.0, output_dir=tmp_path
        )
        assert config.options.jobs == 4
        assert config.options.explain is not None and config.options.explain.jobs == 4
        assert config.options.budget_seconds == 5.0
        assert config.output_dir == tmp_path

    @typechecked
    def test_no_overrides(self) -> None:
        """Without overrides the config is unchanged."""
        config = load_config(REPO_CONFIG)
        assert with_overrides(config) == config


@typechecked
def test_echo_replays(tmp_path: Path) -> None:
    """Loading the echo gives the same config, up to the output directory."""
    config = load_config(REPO_CONFIG)
    echo = config_echo(config)
    assert "output_dir" not in echo
    assert "jobs" not in echo
    replayed = load_config(_write(tmp_path, echo))
    assert replayed == replace(config, output_dir=tmp_path.resolve() / "run")
