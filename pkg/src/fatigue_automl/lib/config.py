"""Run configuration files.

A run config is an INI file::

    [paths]
    input_csv = data/fatigue.csv   ; empty: generate from [synth]
    output_dir = runs/m1
    schema =                       ; empty: the default schema

    [run]
    hypothesis = M1
    families = baseline, linear, gbdt, gbdt:categorical, nn
    budget_seconds = 3600
    ...

    [seeds]
    split = 0
    ...

Every key is optional. Relative paths resolve against the config file's directory.
"""

import configparser
import logging
from collections.abc import Callable
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Final

from typeguard import typechecked

from fatigue_automl.lib.automl.run import RunOptions
from fatigue_automl.lib.constants import DEFAULT_TEST_FRACTION, ExplainRows
from fatigue_automl.lib.errors import ConfigError
from fatigue_automl.lib.explain.artifacts import ExplainOptions
from fatigue_automl.lib.preprocess.pipeline import ImputeSpec
from fatigue_automl.lib.synth.generator import SynthConfig

logger = logging.getLogger(__name__)

_NONE_TOKENS: Final[frozenset[str]] = frozenset({"", "none"})
_TRUE_TOKENS: Final[frozenset[str]] = frozenset({"1", "true", "yes", "on"})
_FALSE_TOKENS: Final[frozenset[str]] = frozenset({"0", "false", "no", "off"})


class Sections:
    """Config file sections."""

    PATHS: Final[str] = "paths"
    RUN: Final[str] = "run"
    SEEDS: Final[str] = "seeds"
    EVALUATION: Final[str] = "evaluation"
    EXPLAIN: Final[str] = "explain"
    IMPUTE: Final[str] = "impute"
    SYNTH: Final[str] = "synth"


@dataclass(frozen=True)
class RunConfig:
    """A parsed run config.

    Args:
        input_csv: The fatigue test table. None means the synthetic table of `synth`.
        output_dir: The run directory.
        schema_path: Schema INI file. None means the default schema.
        test_fraction: Share of rows held out for testing.
        split_seed: Seed of the train/test split.
        options: Run settings.
        synth: Synthetic generator settings.
    """

    input_csv: Path | None = None
    output_dir: Path = Path("run")
    schema_path: Path | None = None
    test_fraction: float = DEFAULT_TEST_FRACTION
    split_seed: int = 0
    options: RunOptions = field(default_factory=RunOptions)
    synth: SynthConfig = field(default_factory=SynthConfig)


def _as_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE_TOKENS:
        return True
    if lowered in _FALSE_TOKENS:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _as_list(text: str) -> tuple[str, ...]:
    return tuple(item.strip() for item in text.split(",") if item.strip())


def _optional(parse: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse_optional(text: str) -> Any:  # noqa: ANN401
        return None if text.strip().lower() in _NONE_TOKENS else parse(text)

    return parse_optional


def _as_rates(text: str) -> dict[str, float]:
    rates = {}
    for item in _as_list(text):
        column, sep, rate = item.partition(":")
        if not sep:
            raise ValueError(f"expected <column>:<rate>, got {item!r}")
        rates[column.strip()] = float(rate)
    return rates


_RUN_KEYS: Final[dict[str, Callable[[str], Any]]] = {
    "hypothesis": str.strip,
    "extra_features": _as_list,
    "drop_features": _as_list,
    "derive_overhang": _as_bool,
    "vif_threshold": _optional(float),
    "golden": _as_bool,
    "golden_policy": str.strip,
    "folds": int,
    "test_fraction": float,
    "families": _as_list,
    "budget_seconds": _optional(float),
    "max_trials": _optional(int),
    "max_members": int,
    "repeats": int,
    "jobs": int,
}
_SEED_KEYS: Final[tuple[str, ...]] = ("split", "pipeline", "search", "explain")
_EXPLAIN_KEYS: Final[dict[str, Callable[[str], Any]]] = {
    "enabled": _as_bool,
    "rows": str.strip,
    "background_size": int,
    "shap_samples": int,
    "permutation_repeats": int,
    "top_k": int,
}
_SYNTH_KEYS: Final[dict[str, Callable[[str], Any]]] = {
    "n_rows": int,
    "noise_std_log10": float,
    "base": float,
    "r_slope": float,
    "yield_slope": float,
    "tig_uplift": float,
    "thickness_slope": float,
    "height_slope": float,
    "ratio_slope": float,
    "planted_collinear": _as_bool,
    "planted_ratio_feature": _as_bool,
    "seed": int,
    "missing_rates": _as_rates,
}
_KEYS: Final[dict[str, frozenset[str]]] = {
    Sections.PATHS: frozenset({"input_csv", "output_dir", "schema"}),
    Sections.RUN: frozenset(_RUN_KEYS),
    Sections.SEEDS: frozenset(_SEED_KEYS),
    Sections.EVALUATION: frozenset({"band_low", "band_high"}),
    Sections.EXPLAIN: frozenset(_EXPLAIN_KEYS),
    Sections.SYNTH: frozenset(_SYNTH_KEYS),
}


def _parse_section(
    parser: configparser.ConfigParser, section: str, keys: dict[str, Callable[[str], Any]]
) -> dict[str, Any]:
    if not parser.has_section(section):
        return {}
    values = {}
    for key, text in parser.items(section):
        try:
            values[key] = keys[key](text)
        except (ValueError, TypeError) as e:
            raise ConfigError(f"[{section}] {key} = {text!r}: {e}") from e
    return values


def _check_keys(parser: configparser.ConfigParser) -> None:
    for section in parser.sections():
        if section == Sections.IMPUTE:
            continue
        if section not in _KEYS:
            raise ConfigError(f"Unknown config section [{section}].")
        unknown = sorted(set(parser.options(section)) - _KEYS[section])
        if unknown:
            raise ConfigError(f"Unknown keys in [{section}]: {unknown}.")


def _resolve(base: Path, text: str | None) -> Path | None:
    if text is None or not text.strip():
        return None
    path = Path(text.strip()).expanduser()
    return path if path.is_absolute() else (base / path).resolve()


@typechecked
def load_config(path: Path) -> RunConfig:
    """Parse a run config file.

    Args:
        path: The INI file.

    Returns:
        The config, with defaults for absent keys.

    Raises:
        FileNotFoundError: If the file does not exist.
        ConfigError: On an unknown section or key, or an unparsable value.
    """
    if not path.is_file():
        raise FileNotFoundError(f"Config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as e:
        raise ConfigError(f"Cannot parse {path}: {e}") from e
    _check_keys(parser)
    base = path.resolve().parent

    paths = dict(parser.items(Sections.PATHS)) if parser.has_section(Sections.PATHS) else {}
    run = _parse_section(parser, Sections.RUN, _RUN_KEYS)
    seeds = _parse_section(parser, Sections.SEEDS, {key: int for key in _SEED_KEYS})
    band = _parse_section(
        parser, Sections.EVALUATION, {"band_low": float, "band_high": float}
    )
    explain = _parse_section(parser, Sections.EXPLAIN, _EXPLAIN_KEYS)
    synth = _parse_section(parser, Sections.SYNTH, _SYNTH_KEYS)
    defaulted = sorted(
        f"[{section}] {key}"
        for section, given in ((Sections.PATHS, paths), (Sections.SEEDS, seeds))
        for key in _KEYS[section] - set(given)
    )
    if defaulted:
        logger.warning(f"Config {path} falls back to defaults for: {', '.join(defaulted)}.")

    try:
        impute = tuple(
            ImputeSpec.parse(column, text)
            for column, text in (
                parser.items(Sections.IMPUTE) if parser.has_section(Sections.IMPUTE) else []
            )
        )
        test_fraction = run.pop("test_fraction", DEFAULT_TEST_FRACTION)
        jobs = run.get("jobs", 1)
        explain_enabled = explain.pop("enabled", True)
        rows = ExplainRows(explain.pop("rows", ExplainRows.TEST))
        explain_options = ExplainOptions(
            **explain,
            rows=rows,
            seed=seeds.get("explain", 0),
            jobs=jobs,
        )
        default_band = RunOptions().band
        options = RunOptions(
            **run,
            pipeline_seed=seeds.get("pipeline", 0),
            search_seed=seeds.get("search", 0),
            band=(
                band.get("band_low", default_band[0]),
                band.get("band_high", default_band[1]),
            ),
            impute=impute,
            explain=explain_options if explain_enabled else None,
        )
        config = RunConfig(
            input_csv=_resolve(base, paths.get("input_csv")),
            output_dir=_resolve(base, paths.get("output_dir")) or (base / "run"),
            schema_path=_resolve(base, paths.get("schema")),
            test_fraction=test_fraction,
            split_seed=seeds.get("split", 0),
            options=options,
            synth=SynthConfig(**synth),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as e:
        raise ConfigError(f"Invalid config {path}: {e}") from e
    return config


@typechecked
def with_overrides(
    config: RunConfig,
    seed_override: int | None = None,
    jobs: int | None = None,
    budget_seconds: float | None = None,
    output_dir: Path | None = None,
) -> RunConfig:
    """Apply command-line overrides.

    `seed_override` replaces every seed: split, pipeline, search, explain and synth.
    """
    options = config.options
    explain = options.explain
    split_seed = config.split_seed
    synth = config.synth
    if seed_override is not None:
        split_seed = seed_override
        synth = replace(synth, seed=seed_override)
        options = replace(options, pipeline_seed=seed_override, search_seed=seed_override)
        if explain is not None:
            explain = replace(explain, seed=seed_override)
    if jobs is not None:
        options = replace(options, jobs=jobs)
        if explain is not None:
            explain = replace(explain, jobs=jobs)
    if budget_seconds is not None:
        options = replace(options, budget_seconds=budget_seconds)
    return replace(
        config,
        split_seed=split_seed,
        synth=synth,
        options=replace(options, explain=explain),
        output_dir=config.output_dir if output_dir is None else output_dir,
    )


def _text(value: Any) -> str:  # noqa: ANN401
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ", ".join(str(item) for item in value)
    if isinstance(value, dict):
        return ", ".join(f"{key}:{val}" for key, val in sorted(value.items()))
    return str(value)


@typechecked
def config_echo(config: RunConfig) -> str:
    """The resolved config as INI text, for replaying a run.

    The output directory is left out: the echo lives in it. Worker counts are left
    out too, since they do not change results.
    """
    options = config.options
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    parser[Sections.PATHS] = {
        "input_csv": _text(config.input_csv or ""),
        "schema": _text(config.schema_path or ""),
    }
    run = {key: getattr(options, key) for key in _RUN_KEYS if hasattr(options, key)}
    run.pop("jobs")
    run["test_fraction"] = config.test_fraction
    parser[Sections.RUN] = {key: _text(value) for key, value in sorted(run.items())}
    parser[Sections.SEEDS] = {
        "split": str(config.split_seed),
        "pipeline": str(options.pipeline_seed),
        "search": str(options.search_seed),
        "explain": str(0 if options.explain is None else options.explain.seed),
    }
    parser[Sections.EVALUATION] = {
        "band_low": _text(options.band[0]),
        "band_high": _text(options.band[1]),
    }
    explain = {"enabled": _text(options.explain is not None)}
    if options.explain is not None:
        explain.update(
            {
                key: _text(getattr(options.explain, key))
                for key in _EXPLAIN_KEYS
                if key != "enabled"
            }
        )
    parser[Sections.EXPLAIN] = explain
    if options.impute:
        parser[Sections.IMPUTE] = {
            spec.column: (
                str(spec.strategy)
                if spec.value is None
                else f"{spec.strategy}:{spec.value}"
            )
            for spec in options.impute
        }
    if config.input_csv is None:
        parser[Sections.SYNTH] = {
            key: _text(value) for key, value in sorted(asdict(config.synth).items())
        }

    lines: list[str] = []
    for section in parser.sections():
        lines.append(f"[{section}]")
        lines.extend(f"{key} = {value}" for key, value in parser.items(section))
        lines.append("")
    return "\n".join(lines)

