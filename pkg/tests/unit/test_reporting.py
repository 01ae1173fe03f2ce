"""Unit tests for run directories and SVG figures."""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from typeguard import typechecked

from fatigue_automl.lib.constants import RunFiles, TableColumns
from fatigue_automl.lib.errors import OutputDirNotEmpty
from fatigue_automl.lib.evalx.metrics import parity_table
from fatigue_automl.lib.reporting.run_dir import RunDirectory, read_manifest
from fatigue_automl.lib.reporting.svg import (
    band_gid,
    beeswarm_figure,
    parity_figure,
    rmse_boxplot_figure,
)
from fatigue_automl.lib.utils import file_sha256


@typechecked
def _fill(out: RunDirectory) -> None:
    out.table("tables/t.csv", pd.DataFrame({"a": [1, 2], "b": [0.5, 1.5]}))
    out.document("doc.json", {"z": 1, "a": [1.0, float("nan")]})
    out.text("note.txt", "hello\n")
    out.write_timings({"ingest": 0.1, "train": 2.0})


class TestRunDirectory:
    """Test RunDirectory."""

    @typechecked
    def test_manifest(self, tmp_path: Path) -> None:
        """The manifest hashes every artifact except itself and the timings."""
        out = RunDirectory(tmp_path / "run")
        _fill(out)
        manifest = out.write_manifest()
        assert list(manifest) == ["doc.json", "note.txt", "tables/t.csv"]
        assert manifest["note.txt"] == file_sha256(out.root / "note.txt")
        assert read_manifest(out.root) == manifest
        assert (out.root / RunFiles.TIMINGS).is_file()
        assert out.written == ["tables/t.csv", "doc.json", "note.txt"]

    @typechecked
    def test_rerun_is_identical(self, tmp_path: Path) -> None:
        """The same artifacts give the same manifest whatever the timings."""
        first = RunDirectory(tmp_path / "a")
        second = RunDirectory(tmp_path / "b")
        _fill(first)
        _fill(second)
        second.write_timings({"ingest": 9.0})
        assert first.write_manifest() == second.write_manifest()

    @typechecked
    def test_json_is_deterministic(self, tmp_path: Path) -> None:
        """Keys are sorted and NaN is written as a string."""
        out = RunDirectory(tmp_path / "run")
        path = out.document("doc.json", {"z": 1, "a": [float("nan")]})
        text = path.read_text(encoding="utf-8")
        assert text.index('"a"') < text.index('"z"')
        assert '"nan"' in text

    @typechecked
    def test_failed_marker(self, tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
        """The marker names the stage; earlier artifacts stay."""
        out = RunDirectory(tmp_path / "run")
        out.text("early.txt", "x")
        with caplog.at_level(logging.ERROR):
            marker = out.mark_failed("search", "boom")
        assert marker.read_text(encoding="utf-8") == "stage: search\nerror: boom\n"
        assert (out.root / "early.txt").is_file()
        assert "Run failed in stage 'search': boom" in caplog.text
        assert RunFiles.FAILED_MARKER in out.write_manifest()

    @typechecked
    def test_not_empty(self, tmp_path: Path) -> None:
        """A fresh run directory must be empty or absent."""
        (tmp_path / "run").mkdir()
        (tmp_path / "run" / "old.txt").write_text("x")
        with pytest.raises(OutputDirNotEmpty):
            RunDirectory(tmp_path / "run")
        reopened = RunDirectory(tmp_path / "run", fresh=False)
        assert reopened.root == tmp_path / "run"

    @typechecked
    def test_empty_dir_is_accepted(self, tmp_path: Path) -> None:
        """An existing empty directory is reused."""
        (tmp_path / "run").mkdir()
        assert RunDirectory(tmp_path / "run").root == tmp_path / "run"


class TestSvg:
    """Test the SVG figures."""

    @pytest.mark.parametrize(
        "factor, side, gid",
        [
            (1.5, "upper", "parity_band_1.5_upper"),
            (1.5, "lower", "parity_band_1.5_lower"),
            (2.0, "upper", "parity_band_2_upper"),
            (2.0, "lower", "parity_band_2_lower"),
        ],
    )
    @typechecked
    def test_parity_band_ids(
        self, tmp_path: Path, factor: float, side: str, gid: str
    ) -> None:
        """Each dashed band line carries its id in the SVG."""
        assert band_gid(factor, side) == gid
        rng = np.random.default_rng(0)
        actual = rng.uniform(50.0, 200.0, size=30)
        table = parity_table(actual, actual + rng.normal(scale=10.0, size=30))
        out = RunDirectory(tmp_path / "run")
        svg = out.figure("parity.svg", parity_figure(table, title="Test"))
        text = svg.read_text(encoding="utf-8")
        assert f'id="{gid}"' in text
        assert 'id="parity_identity"' in text

    @typechecked
    def test_same_table_same_bytes(self, tmp_path: Path) -> None:
        """Rendering a table twice gives identical files."""
        frame = pd.DataFrame(
            {
                TableColumns.FEATURE: ["a"] * 5 + ["b"] * 5,
                TableColumns.SHAP_VALUE: np.linspace(-1.0, 1.0, 10),
                TableColumns.FEATURE_VALUE: np.arange(10.0),
                TableColumns.NORMALIZED_VALUE: np.linspace(0.0, 1.0, 10),
            }
        )
        out = RunDirectory(tmp_path / "run")
        first = out.figure("one.svg", beeswarm_figure(frame, ["b", "a"], seed=2))
        second = out.figure("two.svg", beeswarm_figure(frame, ["b", "a"], seed=2))
        assert first.read_bytes() == second.read_bytes()

    @typechecked
    def test_boxplot(self, tmp_path: Path) -> None:
        """The family boxplot renders to SVG."""
        out = RunDirectory(tmp_path / "run")
        path = out.figure(
            "box.svg", rmse_boxplot_figure({"tree": [0.5, 0.6], "linear": [0.7]})
        )
        assert path.read_text(encoding="utf-8").startswith("<?xml")
