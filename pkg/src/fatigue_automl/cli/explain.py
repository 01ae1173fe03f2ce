# noqa: D100
__doc__ = """
.. click:: fatigue_automl.cli.explain:main
   :prog: fatigue_explain
   :nested: full
"""

import logging

import click
from typeguard import typechecked

from fatigue_automl import explain
from fatigue_automl.lib.constants import DocStrings
from fatigue_automl.lib.errors import FatigueAutoMLError

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)


@click.command(help=DocStrings.EXPLAIN.cli_docstring)
@click.option(
    "--config",
    "config_path",
    type=str,
    required=True,
    help=DocStrings.EXPLAIN.args["config_path"],
)
@click.option(
    "--model-path",
    "--model_path",
    "model_path",
    type=str,
    required=True,
    help=DocStrings.EXPLAIN.args["model_path"],
)
@click.option(
    "--output-dir",
    "--output_dir",
    "output_dir",
    type=str,
    required=False,
    default=DocStrings.EXPLAIN.defaults["output_dir"],
    help=DocStrings.EXPLAIN.args["output_dir"],
)
@click.option(
    "--seed-override",
    "--seed_override",
    "seed_override",
    type=int,
    required=False,
    default=DocStrings.EXPLAIN.defaults["seed_override"],
    help=DocStrings.EXPLAIN.args["seed_override"],
)
@click.option(
    "--jobs",
    type=int,
    required=False,
    default=DocStrings.EXPLAIN.defaults["jobs"],
    help=DocStrings.EXPLAIN.args["jobs"],
)
@typechecked
def main(  # noqa: D103
    config_path: str,
    model_path: str,
    output_dir: str,
    seed_override: int | None,
    jobs: int | None,
) -> str:
    try:
        path = explain(
            config_path=config_path,
            model_path=model_path,
            output_dir=output_dir,
            seed_override=seed_override,
            jobs=jobs,
        )
    except (FatigueAutoMLError, FileNotFoundError) as e:
        raise click.ClickException(str(e)) from e
    logger.info(f"Explanations saved to:\n{path.resolve()}")

    return str(path.resolve())
