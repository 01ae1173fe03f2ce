"""Constants used in the project."""

from enum import StrEnum
from typing import Final

from comb_utils import DocString, ErrorDocString


class Columns:
    """Column name constants for the fatigue test records."""

    SCALE: Final[str] = "Scale"
    LOADING: Final[str] = "Loading"
    AMPLITUDE: Final[str] = "I_A"
    FREQUENCY: Final[str] = "f_T"
    YIELD_STRENGTH: Final[str] = "R_eH"
    TENSILE_STRENGTH: Final[str] = "R_m"
    PRE_TREAT: Final[str] = "Pre_Treat"
    POST_TREAT: Final[str] = "Post_Treat"
    WELD_TYPE: Final[str] = "Weld_type"
    FILLER_YIELD_STRENGTH: Final[str] = "R_eH_filler"
    FILLER_TENSILE_STRENGTH: Final[str] = "R_m_filler"
    BASE_PLATE_LENGTH: Final[str] = "l_BP"
    BASE_PLATE_WIDTH: Final[str] = "w_BP"
    BASE_PLATE_THICKNESS: Final[str] = "t_BP"
    STIFFENER_HEIGHT: Final[str] = "h_S"
    STIFFENER_LENGTH: Final[str] = "l_S"
    STIFFENER_THICKNESS: Final[str] = "t_S"
    WELD_THICKNESS: Final[str] = "a_w"
    CORROSION: Final[str] = "Corrosion"
    STRESS_RATIO: Final[str] = "R"
    STRESS_RANGE: Final[str] = "dsigma_i"
    WELD_POSITION: Final[str] = "Weld_position"
    WELD_PROCESS: Final[str] = "Weld_process"
    CYCLES: Final[str] = "N_i"
    FATIGUE_STRENGTH: Final[str] = "dsigma_c50"

    # Derived.
    OVERHANG: Final[str] = "overhang"
    # Planted by the synthetic generator.
    PLANTED_COLLINEAR: Final[str] = "planted_collinear"


class ColumnKind(StrEnum):
    """Semantic kinds of schema columns."""

    BINARY = "binary"
    CATEGORICAL = "categorical"
    REAL = "real"


class ImputeStrategy(StrEnum):
    """Imputation strategies."""

    CONSTANT = "constant"
    MEDIAN = "median"
    RANDOM_SAMPLE = "random_sample"


class Family(StrEnum):
    """Learner families of the model zoo."""

    BASELINE = "baseline"
    LINEAR = "linear"
    TREE = "tree"
    RANDOM_FOREST = "random_forest"
    EXTRA_TREES = "extra_trees"
    GBDT = "gbdt"
    GBDT_LEAFWISE = "gbdt_leafwise"
    NN = "nn"


class GbdtPreset(StrEnum):
    """Hyperparameter presets of the depth-wise GBDT family."""

    REGULARIZED = "regularized"
    CATEGORICAL = "categorical"


ITERATIVE_FAMILIES: Final[tuple[str, ...]] = (Family.GBDT, Family.GBDT_LEAFWISE, Family.NN)
TREE_FAMILIES: Final[tuple[str, ...]] = (
    Family.TREE,
    Family.RANDOM_FOREST,
    Family.EXTRA_TREES,
    Family.GBDT,
    Family.GBDT_LEAFWISE,
)


class Hypothesis(StrEnum):
    """Fatigue model hypotheses with progressively expanded feature sets."""

    M1 = "M1"
    M2 = "M2"
    M3 = "M3"


class AuditReason(StrEnum):
    """Reasons a golden feature recipe is flagged."""

    INDICATOR_ARITHMETIC = "indicator_arithmetic"
    MIXED_KIND = "mixed_kind"
    UNIT_MISMATCH = "unit_mismatch"


class AuditPolicy(StrEnum):
    """Unit-consistency audit policies."""

    LENIENT = "lenient"
    STRICT = "strict"


class GoldenOp(StrEnum):
    """Operators for golden feature candidates."""

    DIVIDE = "divide"
    SUBTRACT = "subtract"


class TransformDirection(StrEnum):
    """Direction of a power transform."""

    FORWARD = "forward"
    INVERSE = "inverse"


class PostTreatment:
    """Weld post-treatment levels."""

    AS_WELDED: Final[str] = "no weld post-treatment"
    GRINDING: Final[str] = "grinding"
    HEAT: Final[str] = "heat"
    HFMI: Final[str] = "HFMI"
    TIG_DRESSING: Final[str] = "TIG dressing"


class WeldType:
    """Weld type levels."""

    BUTT: Final[str] = "Butt Weld"
    FILLET: Final[str] = "Fillet Weld"


# Ingestion.
MISSING_TOKENS: Final[tuple[str, ...]] = ("", "NA", "NaN", "-")
CSV_ENCODING: Final[str] = "utf-8"

# Split and search protocol.
DEFAULT_TEST_FRACTION: Final[float] = 0.1
DEFAULT_FOLDS: Final[int] = 5
DEFAULT_BUDGET_SECONDS: Final[float] = 3600.0
DEFAULT_MAX_MEMBERS: Final[int] = 25
DEFAULT_FAMILIES: Final[tuple[str, ...]] = (
    "baseline",
    "linear",
    "tree",
    "random_forest",
    "extra_trees",
    "gbdt",
    "gbdt:categorical",
    "gbdt_leafwise",
    "nn",
)
STRATIFICATION_BINS: Final[int] = 10

# Screening.
DEFAULT_VIF_THRESHOLD: Final[float] = 5.0
VIF_SINGULAR_TOL: Final[float] = 1e-12
DIVIDE_GUARD: Final[float] = 1e-9
GOLDEN_FRACTION: Final[float] = 0.05
GOLDEN_MIN_COUNT: Final[int] = 5
GOLDEN_MAX_COUNT: Final[int] = 50
GOLDEN_TREE_DEPTH: Final[int] = 3
GOLDEN_MIN_LEAF: Final[int] = 5
GOLDEN_SCORE_FRACTION: Final[float] = 0.5

# Target transform.
YJ_LAMBDA_BOUNDS: Final[tuple[float, float]] = (-5.0, 5.0)
YJ_LAMBDA_TOL: Final[float] = 1e-6
DIMENSIONLESS: Final[str] = "-"

# Learners.
MAX_BINS: Final[int] = 255
EARLY_STOPPING_ROUNDS: Final[int] = 50
DEFAULT_L2_LEAF: Final[float] = 1.0
NN_BATCH_SIZE: Final[int] = 32
NN_EPOCHS: Final[int] = 200
# Network holdout when no validation rows are passed.
INTERNAL_VALIDATION_FRACTION: Final[float] = 0.1
MIN_ROWS_FOR_INTERNAL_VALIDATION: Final[int] = 20
MODEL_FORMAT_VERSION: Final[int] = 1

# Evaluation.
DEFAULT_BAND: Final[tuple[float, float]] = (0.0, 150.0)
PARITY_BAND_FACTORS: Final[tuple[float, float]] = (1.5, 2.0)

# Explainability.
SHAP_BACKGROUND_SIZE: Final[int] = 512
SHAP_PERMUTATIONS: Final[int] = 2048
PERMUTATION_REPEATS: Final[int] = 5
TOP_K_DECISIONS: Final[int] = 10

# Synthetic data.
BASQUIN_SLOPE: Final[float] = 3.0
REFERENCE_CYCLES: Final[float] = 2e6

# EDA.
DEFAULT_HIST_BINS: Final[int] = 20

# SVG rendering.
SVG_HASH_SALT: Final[str] = "fatigue_automl"


class RunFiles:
    """File names within a run directory."""

    CONFIG_ECHO: Final[str] = "config.ini"
    ENSEMBLE: Final[str] = "ensemble.json"
    FAILED_MARKER: Final[str] = "FAILED"
    GOLDEN_FEATURES: Final[str] = "golden_features.json"
    LEADERBOARD: Final[str] = "leaderboard.csv"
    MANIFEST: Final[str] = "manifest.json"
    METRICS: Final[str] = "metrics.json"
    METRICS_TABLE: Final[str] = "metrics_table.csv"
    MODELS_DIR: Final[str] = "models"
    PARITY_TEST: Final[str] = "parity_test.csv"
    PARITY_TRAIN: Final[str] = "parity_train.csv"
    PIPELINE: Final[str] = "pipeline.json"
    SPLIT: Final[str] = "split.json"
    TIMINGS: Final[str] = "timings.csv"
    VIF_ROUNDS: Final[str] = "vif_rounds.csv"


class ExplainFiles:
    """File names of explainability artifacts."""

    BEESWARM: Final[str] = "shap_beeswarm.csv"
    BEESWARM_SVG: Final[str] = "shap_beeswarm.svg"
    COEFFICIENTS: Final[str] = "linear_coefficients.csv"
    DECISIONS: Final[str] = "decision_top10.csv"
    DEPENDENCE_PREFIX: Final[str] = "dependence_"
    IMPORTANCE_SVG: Final[str] = "shap_importance.svg"
    LEARNING_CURVE_PREFIX: Final[str] = "learning_curve_"
    PARITY_SVG_PREFIX: Final[str] = "parity_"
    PERMUTATION: Final[str] = "permutation_importance.csv"
    RMSE_BOXPLOT_SVG: Final[str] = "rmse_by_family.svg"
    SHAP_IMPORTANCE: Final[str] = "shap_importance.csv"
    SHAP_VALUES: Final[str] = "shap_values.csv"


class EdaFiles:
    """File names of EDA artifacts."""

    CORRELATION: Final[str] = "correlation.csv"
    HIST_PREFIX: Final[str] = "hist_"
    MISSINGNESS: Final[str] = "missingness.csv"
    STATS: Final[str] = "stats.csv"
    VIOLATIONS: Final[str] = "violations.csv"


class SynthFiles:
    """File names of synthetic data artifacts."""

    DATA: Final[str] = "synthetic.csv"
    GROUND_TRUTH: Final[str] = "ground_truth.json"


COMPARISON_FILE: Final[str] = "comparison.csv"


class DocStrings:
    """Docstrings for the public API."""

    EDA: Final = DocString(
        opening="""
Exploratory data analysis of a fatigue test table.

Reads the CSV named in the run config (or generates the synthetic table the config
describes), validates it against the feature schema, and writes the missingness report,
per-column statistics, histogram tables, range violations and the Pearson correlation
matrix of the real columns.

See :doc:`workflow` for more information.
""",
        args={
            "config_path": "Path to the run config INI file.",
            "output_dir": (
                "Directory to write the EDA tables to. Empty string (default) uses "
                '"<output_dir from config>/eda".'
            ),
            "bins": "Number of histogram bins per real column.",
        },
        returns=["The path to the EDA output directory."],
        raises=[
            ErrorDocString(
                error_type="StageError",
                docstring=(
                    'Labeled "ingest", if the CSV is absent, lacks a required column or '
                    "holds an unparsable real cell."
                ),
            ),
            ErrorDocString(
                error_type="OutputDirNotEmpty",
                docstring="If the EDA directory exists and is not empty.",
            ),
        ],
        defaults={"output_dir": "", "bins": DEFAULT_HIST_BINS},
    )

    SYNTH: Final = DocString(
        opening="""
Generate a synthetic fatigue test table with known ground truth.

Draws records on the default feature schema, computes the fatigue strength from a planted
log-linear formula, and writes the CSV together with the generative coefficients.

See :doc:`workflow` for more information.
""",
        args={
            "config_path": "Path to the run config INI file with a `[synth]` section.",
            "output_dir": (
                "Directory to write the synthetic CSV and ground truth to. Empty string "
                '(default) uses "<output_dir from config>/synth".'
            ),
            "seed_override": "Replaces the synthetic generator seed when given.",
        },
        returns=["The path to the synthetic CSV."],
        raises=[],
        defaults={"output_dir": "", "seed_override": None},
    )

    TRAIN: Final = DocString(
        opening="""
Train and explain fatigue strength models for one hypothesis.

Splits the data once, fits the preprocessing pipeline on the training partition,
optionally screens multicollinearity and discovers golden features, runs the budgeted
random hyperparameter search with stratified cross-validation, builds the greedy
ensemble, refits it on the full training partition, evaluates it in MPa on both
partitions and writes metrics, parity tables, models and explainability artifacts to an
empty run directory.

See :doc:`workflow` for more information.
""",
        args={
            "config_path": "Path to the run config INI file.",
            "output_dir": (
                "Run directory. Must be empty or absent. Empty string (default) uses the "
                "config's output directory."
            ),
            "seed_override": "Replaces every seed of the config when given.",
            "jobs": "Number of parallel workers. Does not change results.",
            "budget_seconds": "Replaces the search time budget of the config when given.",
        },
        returns=["The path to the run directory."],
        raises=[
            ErrorDocString(
                error_type="OutputDirNotEmpty",
                docstring="If the run directory exists and is not empty.",
            ),
            ErrorDocString(
                error_type="StageError", docstring="If a pipeline stage fails."
            ),
        ],
        defaults={
            "output_dir": "",
            "seed_override": None,
            "jobs": None,
            "budget_seconds": None,
        },
    )

    EXPLAIN: Final = DocString(
        opening="""
Explain a trained model on the test partition.

Loads a model (or ensemble) file and the pipeline file beside it, rebuilds the fixed
split from the run config, and writes SHAP values, SHAP importance, permutation
importance, dependence tables, decision records for the best and worst predictions, and
SVG renderings.

See :doc:`workflow` for more information.
""",
        args={
            "config_path": "Path to the run config INI file.",
            "model_path": (
                "Path to a model or ensemble JSON file inside a run directory's models "
                "folder."
            ),
            "output_dir": (
                "Directory to write the explanations to. Empty string (default) uses "
                '"<run dir>/explain_<model name>".'
            ),
            "seed_override": "Replaces every seed of the config when given.",
            "jobs": "Number of parallel workers. Does not change results.",
        },
        returns=["The path to the explanation directory."],
        raises=[
            ErrorDocString(
                error_type="FileNotFoundError",
                docstring="If the model or pipeline file does not exist.",
            ),
            ErrorDocString(
                error_type="StageError",
                docstring='Labeled "load", if the model files cannot be read.',
            ),
        ],
        defaults={"output_dir": "", "seed_override": None, "jobs": None},
    )

    REPORT: Final = DocString(
        opening="""
Compare the metrics of trained runs side by side.

Reads the metrics of several run directories and writes one comparison table with the
six metrics (R², RMSE, MAE on train and test) for the full range and the band of each
run.

See :doc:`workflow` for more information.
""",
        args={
            "run_dirs": "Run directories to compare.",
            "output_dir": (
                "Directory to write the comparison to. Empty string (default) uses the "
                "present working directory."
            ),
        },
        returns=["The path to the comparison CSV."],
        raises=[
            ErrorDocString(
                error_type="FileNotFoundError",
                docstring="If a run directory has no metrics file.",
            )
        ],
        defaults={"output_dir": ""},
    )


class TableColumns:
    """Column names of the tables written to run directories."""

    ABS_ERROR: Final[str] = "abs_error"
    ACTUAL: Final[str] = "actual"
    BAND: Final[str] = "band"
    BASE_VALUE: Final[str] = "base_value"
    BIN_HIGH: Final[str] = "bin_high"
    BIN_LOW: Final[str] = "bin_low"
    COEFFICIENT: Final[str] = "coefficient"
    COLUMN: Final[str] = "column"
    COUNT: Final[str] = "count"
    ENSEMBLE_WEIGHT: Final[str] = "ensemble_weight"
    ERROR: Final[str] = "error"
    FAMILY: Final[str] = "family"
    FEATURE: Final[str] = "feature"
    FEATURE_VALUE: Final[str] = "feature_value"
    FLAGS: Final[str] = "flags"
    FOLD_RMSE: Final[str] = "fold_rmse"
    FULL: Final[str] = "full"
    HYPERPARAMETERS: Final[str] = "hyperparameters"
    INCLUDED: Final[str] = "included"
    INSIDE_NARROW: Final[str] = "inside_1_5_sigma"
    INSIDE_WIDE: Final[str] = "inside_2_sigma"
    ITERATION: Final[str] = "iteration"
    KIND: Final[str] = "kind"
    LEVELS: Final[str] = "levels"
    LHS: Final[str] = "lhs"
    MAX: Final[str] = "max"
    MEAN: Final[str] = "mean"
    MEAN_ABS_SHAP: Final[str] = "mean_abs_shap"
    MEAN_CV_RMSE: Final[str] = "mean_cv_rmse"
    MEDIAN: Final[str] = "median"
    METRIC: Final[str] = "metric"
    MIN: Final[str] = "min"
    MISSING: Final[str] = "missing"
    MISSING_RATIO: Final[str] = "missing_ratio"
    NORMALIZED_VALUE: Final[str] = "normalized_value"
    OP: Final[str] = "op"
    PATH: Final[str] = "path"
    PERCENT: Final[str] = "percent"
    PREDICTED: Final[str] = "predicted"
    PRESET: Final[str] = "preset"
    RANK: Final[str] = "rank"
    RECIPE: Final[str] = "recipe"
    RESIDUAL: Final[str] = "residual"
    RHS: Final[str] = "rhs"
    ROUND: Final[str] = "round"
    ROW: Final[str] = "row"
    ROW_ID: Final[str] = "row_id"
    R_SQUARED: Final[str] = "r_squared"
    SCORE: Final[str] = "score"
    SECONDS: Final[str] = "seconds"
    SEED: Final[str] = "seed"
    SELECTED: Final[str] = "selected"
    SHAP_VALUE: Final[str] = "shap_value"
    STAGE: Final[str] = "stage"
    STATUS: Final[str] = "status"
    STD: Final[str] = "std"
    TRAIN_METRIC: Final[str] = "train_metric"
    TRIAL: Final[str] = "trial"
    VALID_METRIC: Final[str] = "valid_metric"
    VALUE: Final[str] = "value"
    VIF: Final[str] = "vif"
    BEST_ITERATION: Final[str] = "best_iteration"


class DecisionKind(StrEnum):
    """Kinds of decision records."""

    BEST = "best"
    WORST = "worst"


class ExplainRows(StrEnum):
    """Which partition is explained."""

    TEST = "test"
    TRAIN = "train"


class TrialStatus(StrEnum):
    """Outcome of a search trial."""

    FAILED = "failed"
    OK = "ok"


class MetricRow(StrEnum):
    """Rows of the model comparison table."""

    R2_TRAIN = "R2 Train"
    R2_TEST = "R2 Test"
    RMSE_TRAIN = "RMSE Train [MPa]"
    RMSE_TEST = "RMSE Test [MPa]"
    MAE_TRAIN = "MAE Train [MPa]"
    MAE_TEST = "MAE Test [MPa]"
