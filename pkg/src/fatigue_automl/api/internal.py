"""Internal functions overlay library and are typically wrapped by public functions.

This allows us to maintain a separation of API from implementation.
Internal functions take resolved arguments: paths are `Path`s and "use the default" is
None rather than an empty string.
"""

from collections.abc import Sequence
from pathlib import Path

from typeguard import typechecked

from fatigue_automl.lib import workflow
from fatigue_automl.lib.constants import DocStrings


def _optional_path(path: Path | str) -> Path | None:
    return Path(path) if str(path) else None


@typechecked
def eda(config_path: Path | str, output_dir: Path | str, bins: int) -> Path:  # noqa: D103
    return workflow.eda(
        config_path=Path(config_path), output_dir=_optional_path(output_dir), bins=bins
    )


eda.__doc__ = DocStrings.EDA.api_docstring


@typechecked
def synth(  # noqa: D103
    config_path: Path | str, output_dir: Path | str, seed_override: int | None
) -> Path:
    return workflow.synth(
        config_path=Path(config_path),
        output_dir=_optional_path(output_dir),
        seed_override=seed_override,
    )


synth.__doc__ = DocStrings.SYNTH.api_docstring


@typechecked
def train(  # noqa: D103
    config_path: Path | str,
    output_dir: Path | str,
    seed_override: int | None,
    jobs: int | None,
    budget_seconds: float | None,
) -> Path:
    return workflow.train(
        config_path=Path(config_path),
        output_dir=_optional_path(output_dir),
        seed_override=seed_override,
        jobs=jobs,
        budget_seconds=budget_seconds,
    )


train.__doc__ = DocStrings.TRAIN.api_docstring


@typechecked
def explain(  # noqa: D103
    config_path: Path | str,
    model_path: Path | str,
    output_dir: Path | str,
    seed_override: int | None,
    jobs: int | None,
) -> Path:
    return workflow.explain(
        config_path=Path(config_path),
        model_path=Path(model_path),
        output_dir=_optional_path(output_dir),
        seed_override=seed_override,
        jobs=jobs,
    )


explain.__doc__ = DocStrings.EXPLAIN.api_docstring


@typechecked
def report(run_dirs: Sequence[Path | str], output_dir: Path | str) -> Path:  # noqa: D103
    return workflow.report(
        run_dirs=[Path(run_dir) for run_dir in run_dirs],
        output_dir=_optional_path(output_dir),
    )


report.__doc__ = DocStrings.REPORT.api_docstring
