"""Run directories: artifact writing, the FAILED marker and the content manifest."""

import logging
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import pandas as pd
from matplotlib.figure import Figure
from typeguard import typechecked

from fatigue_automl.lib.constants import RunFiles, TableColumns
from fatigue_automl.lib.reporting.svg import save_svg
from fatigue_automl.lib.utils import dump_json, file_sha256, load_json, prepare_output_dir

logger = logging.getLogger(__name__)

# Wall times vary between reruns, so they stay out of the manifest.
_UNHASHED = frozenset({RunFiles.MANIFEST, RunFiles.TIMINGS})


class RunDirectory:
    """Writes the artifacts of a run under one root directory.

    Names are relative POSIX paths; subdirectories are created on demand.
    """

    def __init__(self, root: Path, fresh: bool = True) -> None:
        """Open a run directory.

        Args:
            root: The directory.
            fresh: Require the directory to be empty or absent, and create it.

        Raises:
            OutputDirNotEmpty: If `fresh` and the directory holds files.
        """
        self.root = prepare_output_dir(root) if fresh else root
        self.written: list[str] = []

    def path(self, name: str) -> Path:
        """Absolute path of an artifact, with its parent created."""
        path = self.root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def table(self, name: str, frame: pd.DataFrame) -> Path:
        """Write a table as UTF-8 CSV."""
        path = self.path(name)
        frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
        self.written.append(name)
        return path

    def document(self, name: str, obj: Any) -> Path:
        """Write an object as deterministic JSON."""
        path = dump_json(obj, self.path(name))
        self.written.append(name)
        return path

    def figure(self, name: str, fig: Figure) -> Path:
        """Write a figure as deterministic SVG."""
        path = save_svg(fig, self.path(name))
        self.written.append(name)
        return path

    def text(self, name: str, content: str) -> Path:
        """Write a text file."""
        path = self.path(name)
        path.write_text(content, encoding="utf-8")
        self.written.append(name)
        return path

    def mark_failed(self, stage: str, message: str) -> Path:
        """Leave a FAILED marker naming the stage. Earlier artifacts are kept."""
        logger.error(f"Run failed in stage {stage!r}: {message}")
        return self.text(RunFiles.FAILED_MARKER, f"stage: {stage}\nerror: {message}\n")

    def write_timings(self, timings: Mapping[str, float]) -> Path:
        """Write stage wall times, outside the manifest."""
        frame = pd.DataFrame(
            {
                TableColumns.STAGE: list(timings.keys()),
                TableColumns.SECONDS: list(timings.values()),
            }
        )
        path = self.path(RunFiles.TIMINGS)
        frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
        return path

    @typechecked
    def write_manifest(self) -> dict[str, str]:
        """Hash every file under the root, except the manifest and the timings.

        Returns:
            Relative path to SHA-256, sorted by path.
        """
        manifest = {
            path.relative_to(self.root).as_posix(): file_sha256(path)
            for path in sorted(self.root.rglob("*"))
            if path.is_file() and path.relative_to(self.root).as_posix() not in _UNHASHED
        }
        dump_json(manifest, self.root / RunFiles.MANIFEST)
        logger.info(f"Wrote manifest of {len(manifest)} files to {self.root}.")
        return manifest


@typechecked
def read_manifest(root: Path) -> dict[str, str]:
    """The manifest of a run directory."""
    return load_json(root / RunFiles.MANIFEST)
