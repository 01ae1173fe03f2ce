# noqa: D100
__doc__ = """
.. click:: fatigue_automl.cli.synth:main
   :prog: fatigue_synth
   :nested: full
"""

import logging

import click
from typeguard import typechecked

from fatigue_automl import synth
from fatigue_automl.lib.constants import DocStrings
from fatigue_automl.lib.errors import FatigueAutoMLError

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)


@click.command(help=DocStrings.SYNTH.cli_docstring)
@click.option(
    "--config",
    "config_path",
    type=str,
    required=True,
    help=DocStrings.SYNTH.args["config_path"],
)
@click.option(
    "--output-dir",
    "--output_dir",
    "output_dir",
    type=str,
    required=False,
    default=DocStrings.SYNTH.defaults["output_dir"],
    help=DocStrings.SYNTH.args["output_dir"],
)
@click.option(
    "--seed-override",
    "--seed_override",
    "seed_override",
    type=int,
    required=False,
    default=DocStrings.SYNTH.defaults["seed_override"],
    help=DocStrings.SYNTH.args["seed_override"],
)
@typechecked
def main(  # noqa: D103
    config_path: str, output_dir: str, seed_override: int | None
) -> str:
    try:
        path = synth(
            config_path=config_path, output_dir=output_dir, seed_override=seed_override
        )
    except (FatigueAutoMLError, FileNotFoundError, ValueError) as e:
        raise click.ClickException(str(e)) from e
    logger.info(f"Synthetic table saved to:\n{path.resolve()}")

    return str(path.resolve())
