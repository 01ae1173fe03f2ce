"""Public functions wrap internal functions which wrap library functions.

This allows separation of API from implementation. It also allows a simplified public API
separate from a more complex internal API with more options for power users.
"""

from collections.abc import Sequence
from pathlib import Path

from typeguard import typechecked

from fatigue_automl.api import internal
from fatigue_automl.lib.constants import DocStrings


@typechecked
def eda(  # noqa: D103
    config_path: Path | str,
    output_dir: Path | str = DocStrings.EDA.defaults["output_dir"],
    bins: int = DocStrings.EDA.defaults["bins"],
) -> Path:
    return internal.eda(config_path=config_path, output_dir=output_dir, bins=bins)


eda.__doc__ = DocStrings.EDA.api_docstring


@typechecked
def synth(  # noqa: D103
    config_path: Path | str,
    output_dir: Path | str = DocStrings.SYNTH.defaults["output_dir"],
    seed_override: int | None = DocStrings.SYNTH.defaults["seed_override"],
) -> Path:
    return internal.synth(
        config_path=config_path, output_dir=output_dir, seed_override=seed_override
    )


synth.__doc__ = DocStrings.SYNTH.api_docstring


@typechecked
def train(  # noqa: D103
    config_path: Path | str,
    output_dir: Path | str = DocStrings.TRAIN.defaults["output_dir"],
    seed_override: int | None = DocStrings.TRAIN.defaults["seed_override"],
    jobs: int | None = DocStrings.TRAIN.defaults["jobs"],
    budget_seconds: float | None = DocStrings.TRAIN.defaults["budget_seconds"],
) -> Path:
    return internal.train(
        config_path=config_path,
        output_dir=output_dir,
        seed_override=seed_override,
        jobs=jobs,
        budget_seconds=budget_seconds,
    )


train.__doc__ = DocStrings.TRAIN.api_docstring


@typechecked
def explain(  # noqa: D103
    config_path: Path | str,
    model_path: Path | str,
    output_dir: Path | str = DocStrings.EXPLAIN.defaults["output_dir"],
    seed_override: int | None = DocStrings.EXPLAIN.defaults["seed_override"],
    jobs: int | None = DocStrings.EXPLAIN.defaults["jobs"],
) -> Path:
    return internal.explain(
        config_path=config_path,
        model_path=model_path,
        output_dir=output_dir,
        seed_override=seed_override,
        jobs=jobs,
    )


explain.__doc__ = DocStrings.EXPLAIN.api_docstring


@typechecked
def report(  # noqa: D103
    run_dirs: Sequence[Path | str],
    output_dir: Path | str = DocStrings.REPORT.defaults["output_dir"],
) -> Path:
    return internal.report(run_dirs=run_dirs, output_dir=output_dir)


report.__doc__ = DocStrings.REPORT.api_docstring
