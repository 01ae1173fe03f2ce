# noqa: D100
__doc__ = """
.. click:: fatigue_automl.cli.eda:main
   :prog: fatigue_eda
   :nested: full
"""

import logging

import click
from typeguard import typechecked

from fatigue_automl import eda
from fatigue_automl.lib.constants import DocStrings
from fatigue_automl.lib.errors import FatigueAutoMLError

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)


@click.command(help=DocStrings.EDA.cli_docstring)
@click.option(
    "--config",
    "config_path",
    type=str,
    required=True,
    help=DocStrings.EDA.args["config_path"],
)
@click.option(
    "--output-dir",
    "--output_dir",
    "output_dir",
    type=str,
    required=False,
    default=DocStrings.EDA.defaults["output_dir"],
    help=DocStrings.EDA.args["output_dir"],
)
@click.option(
    "--bins",
    type=int,
    required=False,
    default=DocStrings.EDA.defaults["bins"],
    help=DocStrings.EDA.args["bins"],
)
@typechecked
def main(config_path: str, output_dir: str, bins: int) -> str:  # noqa: D103
    try:
        path = eda(config_path=config_path, output_dir=output_dir, bins=bins)
    except (FatigueAutoMLError, FileNotFoundError) as e:
        raise click.ClickException(str(e)) from e
    logger.info(f"EDA tables saved to:\n{path.resolve()}")

    return str(path.resolve())
