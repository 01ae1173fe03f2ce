"""Utility functions for end-to-end tests."""

from pathlib import Path

from typeguard import typechecked

SMALL_CONFIG = """\
[paths]
input_csv = {input_csv}
output_dir = run
schema =

[run]
hypothesis = M1
families = baseline, linear, tree
folds = 3
max_trials = 4
budget_seconds = none
max_members = 5
golden = true

[seeds]
split = 0
pipeline = 0
search = 0
explain = 0

[explain]
background_size = 30
shap_samples = 8
permutation_repeats = 2
top_k = 10

[synth]
n_rows = 150
seed = 0
"""


@typechecked
def write_config(directory: Path, input_csv: str = "") -> Path:
    """Write a small synthetic run config into `directory`."""
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "config.ini"
    path.write_text(SMALL_CONFIG.format(input_csv=input_csv), encoding="utf-8")
    return path


RECOVERY_CONFIG = """\
[paths]
input_csv =
output_dir = run
schema =

[run]
hypothesis = M1
families = linear, tree, gbdt
folds = 5
max_trials = 30
budget_seconds = none
max_members = 25
golden = false
vif_threshold = 5

[seeds]
split = 0
pipeline = 0
search = 0
explain = 0

[explain]
rows = test
background_size = 100
permutation_repeats = 2
top_k = 10

[synth]
n_rows = 3000
noise_std_log10 = 0.02
seed = 0
"""


@typechecked
def write_recovery_config(directory: Path) -> Path:
    """Write the full-size, low-noise synthetic run config into `directory`."""
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "config.ini"
    path.write_text(RECOVERY_CONFIG, encoding="utf-8")
    return path
