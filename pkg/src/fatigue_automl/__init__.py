"""Top-level init."""

from fatigue_automl.api import eda, explain, report, synth, train
