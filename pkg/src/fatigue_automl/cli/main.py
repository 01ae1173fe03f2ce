# noqa: D100
__doc__ = """
.. click:: fatigue_automl.cli.main:cli
   :prog: fatigue_automl
   :nested: full
"""

import click

from fatigue_automl.cli import eda, explain, report, synth, train


@click.group()
def cli() -> None:
    """Explainable AutoML for the fatigue strength of welded stiffeners."""


cli.add_command(eda.main, name="eda")
cli.add_command(synth.main, name="synth")
cli.add_command(train.main, name="train")
cli.add_command(explain.main, name="explain")
cli.add_command(report.main, name="report")
