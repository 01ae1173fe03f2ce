"""The commands: EDA, synthetic data, training, explanation and run comparison."""

import logging
from collections.abc import Sequence
from pathlib import Path

import pandas as pd
from typeguard import typechecked

from fatigue_automl.lib.automl.bundle import load_bundle, run_dir_of
from fatigue_automl.lib.automl.run import Stage, run, stage
from fatigue_automl.lib.config import RunConfig, config_echo, load_config, with_overrides
from fatigue_automl.lib.constants import (
    COMPARISON_FILE,
    DEFAULT_HIST_BINS,
    ColumnKind,
    EdaFiles,
    RunFiles,
    SynthFiles,
    TableColumns,
)
from fatigue_automl.lib.errors import StageError
from fatigue_automl.lib.evalx.metrics import Metrics, comparison_frame, metrics_table
from fatigue_automl.lib.explain.artifacts import (
    ExplainOptions,
    explain_bundle,
    write_explanation,
)
from fatigue_automl.lib.features.engineered import add_overhang
from fatigue_automl.lib.reporting.run_dir import RunDirectory
from fatigue_automl.lib.synth.generator import (
    generate_synthetic,
    ground_truth,
    write_synthetic,
)
from fatigue_automl.lib.tabular.dataset import Dataset
from fatigue_automl.lib.tabular.eda import (
    eda_summary,
    histogram_frame,
    missingness_frame,
    real_correlation,
    stats_frame,
)
from fatigue_automl.lib.tabular.feature_schema import default_schema, load_schema
from fatigue_automl.lib.tabular.ingest import load_csv, violations_frame
from fatigue_automl.lib.tabular.split import load_split, save_split, train_test_split
from fatigue_automl.lib.utils import load_json, prepare_output_dir

logger = logging.getLogger(__name__)

_EDA_DIR = "eda"
_SYNTH_DIR = "synth"
_EXPLAIN_DIR_PREFIX = "explain_"


@typechecked
def load_dataset(config: RunConfig) -> Dataset:
    """The configured table: the input CSV, or the synthetic table without one.

    Raises:
        StageError: Labeled "ingest", on any reading or parsing failure.
    """
    with stage(Stage.INGEST, {}):
        if config.input_csv is None:
            logger.info(f"No input CSV configured. Generating {config.synth.n_rows} rows.")
            return generate_synthetic(config.synth)
        schema = default_schema()
        if config.schema_path is not None:
            schema = load_schema(config.schema_path)
        ds = load_csv(config.input_csv, schema)
    if ds.violations:
        logger.warning(f"{len(ds.violations)} cells of {config.input_csv} are out of range.")
    return ds


@typechecked
def eda(
    config_path: Path, output_dir: Path | None = None, bins: int = DEFAULT_HIST_BINS
) -> Path:
    """Write the exploratory tables of the configured table.

    Args:
        config_path: The run config.
        output_dir: Empty or absent directory. None means "<config output_dir>/eda".
        bins: Histogram bins per real column.

    Returns:
        The EDA directory.
    """
    config = load_config(config_path)
    out = RunDirectory(config.output_dir / _EDA_DIR if output_dir is None else output_dir)
    ds = load_dataset(config)
    report = eda_summary(ds, bins)

    out.table(EdaFiles.MISSINGNESS, missingness_frame(report))
    out.table(EdaFiles.STATS, stats_frame(report))
    for summary in report.columns:
        if summary.kind == ColumnKind.REAL and summary.bin_counts:
            out.table(f"{EdaFiles.HIST_PREFIX}{summary.name}.csv", histogram_frame(summary))
    out.table(EdaFiles.VIOLATIONS, violations_frame(ds.violations))
    correlation = real_correlation(ds)
    if correlation is not None:
        out.table(
            EdaFiles.CORRELATION,
            correlation.to_frame().rename_axis(TableColumns.FEATURE).reset_index(),
        )
    if report.negative_overhang_rows:
        logger.warning(
            f"{len(report.negative_overhang_rows)} rows have a stiffener longer than the "
            f"base plate is wide: {list(report.negative_overhang_rows)}"
        )
    out.write_manifest()
    return out.root


@typechecked
def synth(
    config_path: Path, output_dir: Path | None = None, seed_override: int | None = None
) -> Path:
    """Write the synthetic table of the config and its ground truth.

    Args:
        config_path: The run config.
        output_dir: Empty or absent directory. None means "<config output_dir>/synth".
        seed_override: Replaces the generator seed.

    Returns:
        The synthetic CSV.
    """
    config = with_overrides(load_config(config_path), seed_override=seed_override)
    directory = prepare_output_dir(
        config.output_dir / _SYNTH_DIR if output_dir is None else output_dir
    )
    return write_synthetic(config.synth, directory)


@typechecked
def train(
    config_path: Path,
    output_dir: Path | None = None,
    seed_override: int | None = None,
    jobs: int | None = None,
    budget_seconds: float | None = None,
) -> Path:
    """Run the configured hypothesis into an empty run directory.

    On a stage failure the artifacts written so far stay, next to a FAILED marker and the
    manifest, and the StageError is re-raised.

    Returns:
        The run directory.
    """
    config = with_overrides(
        load_config(config_path),
        seed_override=seed_override,
        jobs=jobs,
        budget_seconds=budget_seconds,
        output_dir=output_dir,
    )
    out = RunDirectory(config.output_dir)
    try:
        ds = load_dataset(config)
        train_ds, test_ds = train_test_split(ds, config.test_fraction, config.split_seed)
        out.text(RunFiles.CONFIG_ECHO, config_echo(config))
        save_split(train_ds, test_ds, out.path(RunFiles.SPLIT))
        if config.input_csv is None:
            out.document(SynthFiles.GROUND_TRUTH, ground_truth(config.synth))
        run(train_ds, test_ds, config.options, out)
    except StageError as e:
        out.mark_failed(e.stage, e.message)
        out.write_manifest()
        raise
    out.write_manifest()
    logger.info(f"Run of {config.options.hypothesis} written to {out.root}.")
    return out.root


@typechecked
def explain(
    config_path: Path,
    model_path: Path,
    output_dir: Path | None = None,
    seed_override: int | None = None,
    jobs: int | None = None,
) -> Path:
    """Explain a model file of a run on that run's split.

    Args:
        config_path: The run config the model was trained with.
        model_path: An ensemble file, or a member file under the run's models folder.
        output_dir: Empty or absent directory. None means
            "<run dir>/explain_<model file stem>".
        seed_override: Replaces every seed.
        jobs: Worker threads.

    Returns:
        The explanation directory.

    Raises:
        FileNotFoundError: If the model file or the run's pipeline file is absent.
        StageError: Labeled "load", if the model files cannot be read.
    """
    if not model_path.is_file():
        raise FileNotFoundError(f"Model file not found: {model_path}")
    root = run_dir_of(model_path)
    if not (root / RunFiles.PIPELINE).is_file():
        raise FileNotFoundError(f"Pipeline file not found: {root / RunFiles.PIPELINE}")
    config = with_overrides(load_config(config_path), seed_override=seed_override, jobs=jobs)
    with stage(Stage.LOAD, {}):
        bundle = load_bundle(root, model_path)

    ds = load_dataset(config)
    split_path = root / RunFiles.SPLIT
    if split_path.is_file():
        train_ds, test_ds = load_split(ds, split_path)
    else:
        logger.warning(f"No split file in {root}. Re-splitting with the config's seed.")
        train_ds, test_ds = train_test_split(ds, config.test_fraction, config.split_seed)
    if config.options.derive_overhang:
        train_ds, test_ds = add_overhang(train_ds), add_overhang(test_ds)

    options = config.options.explain or ExplainOptions(
        seed=config.options.search_seed, jobs=config.options.jobs
    )
    out = RunDirectory(
        root / f"{_EXPLAIN_DIR_PREFIX}{model_path.stem}" if output_dir is None else output_dir
    )
    write_explanation(explain_bundle(bundle, train_ds, test_ds, options), out)
    out.write_manifest()
    return out.root


def _run_metrics_table(root: Path) -> tuple[str, pd.DataFrame]:
    path = root / RunFiles.METRICS
    if not path.is_file():
        raise FileNotFoundError(f"Metrics file not found: {path}")
    document = load_json(path)

    def metrics(partition: str, scope: str) -> Metrics | None:
        data = document[partition][scope]
        return None if data is None else Metrics.from_dict(data)

    table = metrics_table(
        metrics("train", "full"),
        metrics("test", "full"),
        metrics("train", "band"),
        metrics("test", "band"),
    )
    return f"{root.name}:{document['hypothesis']}", table


@typechecked
def report(run_dirs: Sequence[Path], output_dir: Path | None = None) -> Path:
    """Write the metrics of several runs side by side.

    Args:
        run_dirs: Finished run directories, in column order.
        output_dir: Directory for the comparison file. None means the working directory.

    Returns:
        The comparison CSV.
    """
    if not run_dirs:
        raise ValueError("report needs at least one run directory.")
    tables = dict(_run_metrics_table(root) for root in run_dirs)
    if len(tables) != len(run_dirs):
        raise ValueError("Run directories must have distinct names.")
    directory = Path.cwd() if output_dir is None else output_dir
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / COMPARISON_FILE
    comparison_frame(tables).to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    logger.info(f"Compared {len(tables)} runs in {path}.")
    return path
