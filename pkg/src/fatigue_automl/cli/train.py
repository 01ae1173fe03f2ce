# noqa: D100
__doc__ = """
.. click:: fatigue_automl.cli.train:main
   :prog: fatigue_train
   :nested: full
"""

import logging

import click
from typeguard import typechecked

from fatigue_automl import train
from fatigue_automl.lib.constants import DocStrings
from fatigue_automl.lib.errors import FatigueAutoMLError

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)


@click.command(help=DocStrings.TRAIN.cli_docstring)
@click.option(
    "--config",
    "config_path",
    type=str,
    required=True,
    help=DocStrings.TRAIN.args["config_path"],
)
@click.option(
    "--output-dir",
    "--output_dir",
    "output_dir",
    type=str,
    required=False,
    default=DocStrings.TRAIN.defaults["output_dir"],
    help=DocStrings.TRAIN.args["output_dir"],
)
@click.option(
    "--seed-override",
    "--seed_override",
    "seed_override",
    type=int,
    required=False,
    default=DocStrings.TRAIN.defaults["seed_override"],
    help=DocStrings.TRAIN.args["seed_override"],
)
@click.option(
    "--jobs",
    type=int,
    required=False,
    default=DocStrings.TRAIN.defaults["jobs"],
    help=DocStrings.TRAIN.args["jobs"],
)
@click.option(
    "--budget-seconds",
    "--budget_seconds",
    "budget_seconds",
    type=float,
    required=False,
    default=DocStrings.TRAIN.defaults["budget_seconds"],
    help=DocStrings.TRAIN.args["budget_seconds"],
)
@typechecked
def main(  # noqa: D103
    config_path: str,
    output_dir: str,
    seed_override: int | None,
    jobs: int | None,
    budget_seconds: float | None,
) -> str:
    try:
        path = train(
            config_path=config_path,
            output_dir=output_dir,
            seed_override=seed_override,
            jobs=jobs,
            budget_seconds=budget_seconds,
        )
    except (FatigueAutoMLError, FileNotFoundError) as e:
        raise click.ClickException(str(e)) from e
    logger.info(f"Run directory saved to:\n{path.resolve()}")

    return str(path.resolve())
