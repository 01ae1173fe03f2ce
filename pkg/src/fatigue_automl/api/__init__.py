"""Public and internal APIs."""

from fatigue_automl.api.public import eda, explain, report, synth, train
