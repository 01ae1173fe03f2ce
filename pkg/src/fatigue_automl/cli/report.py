# noqa: D100
__doc__ = """
.. click:: fatigue_automl.cli.report:main
   :prog: fatigue_report
   :nested: full
"""

import logging

import click
from typeguard import typechecked

from fatigue_automl import report
from fatigue_automl.lib.constants import DocStrings
from fatigue_automl.lib.errors import FatigueAutoMLError

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)


@click.command(help=DocStrings.REPORT.cli_docstring)
@click.option(
    "--run-dir",
    "--run_dir",
    "run_dirs",
    type=str,
    multiple=True,
    required=True,
    help=DocStrings.REPORT.args["run_dirs"] + " Repeat the option once per run.",
)
@click.option(
    "--output-dir",
    "--output_dir",
    "output_dir",
    type=str,
    required=False,
    default=DocStrings.REPORT.defaults["output_dir"],
    help=DocStrings.REPORT.args["output_dir"],
)
@typechecked
def main(run_dirs: tuple[str, ...], output_dir: str) -> str:  # noqa: D103
    try:
        path = report(run_dirs=list(run_dirs), output_dir=output_dir)
    except (FatigueAutoMLError, FileNotFoundError, ValueError) as e:
        raise click.ClickException(str(e)) from e
    logger.info(f"Comparison saved to:\n{path.resolve()}")

    return str(path.resolve())
