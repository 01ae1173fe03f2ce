"""Unit tests for the learner zoo."""

from pathlib import Path

import numpy as np
import pytest
from typeguard import typechecked

from fatigue_automl.lib.constants import Family, GbdtPreset, TableColumns
from fatigue_automl.lib.errors import (
    InvalidHyperparameter,
    NotIterative,
    SingularSystem,
    WidthMismatch,
)
from fatigue_automl.lib.learners.linear import fit_least_squares
from fatigue_automl.lib.learners.model import (
    LearnerSpec,
    fit,
    learning_curve,
    load_model,
    model_json,
    predict,
    save_model,
)
from fatigue_automl.lib.learners.nn import (
    NetworkWeights,
    init_network,
    network_loss_and_gradients,
)
from fatigue_automl.lib.learners.spaces import (
    DOMAINS,
    SPACES,
    IntRange,
    sample_hyperparameters,
)
from fatigue_automl.lib.learners.tree import grow_tree

_SMALL_HP = {
    Family.TREE: {"max_depth": 3},
    Family.RANDOM_FOREST: {"n_estimators": 5, "max_depth": 3, "max_features": 0.5},
    Family.EXTRA_TREES: {"n_estimators": 5, "max_depth": 3},
    Family.GBDT: {"n_estimators": 10, "max_depth": 2},
    Family.GBDT_LEAFWISE: {"n_estimators": 10, "num_leaves": 4, "min_data_in_leaf": 3},
    Family.NN: {"dense1": 4, "dense2": 3, "epochs": 5, "batch_size": 8},
}


@pytest.fixture(scope="module")
@typechecked
def regression_data() -> tuple[np.ndarray, np.ndarray]:
    """A smooth target of three standardized features."""
    rng = np.random.default_rng(0)
    X = rng.normal(size=(60, 3))
    y = 1.5 * X[:, 0] - np.abs(X[:, 1]) + 0.1 * rng.normal(size=60)
    return X, y


class TestLinear:
    """Test the least-squares learner."""

    @pytest.mark.parametrize(
        "y, intercept, slope",
        [([2.0, 4.0, 6.0], 0.0, 2.0), ([1.0, 2.0, 2.0], 2.0 / 3.0, 0.5)],
    )
    @typechecked
    def test_exact_fits(self, y: list[float], intercept: float, slope: float) -> None:
        """Hand-solvable fits on x = 1, 2, 3."""
        b0, coef, rank = fit_least_squares(np.array([[1.0], [2.0], [3.0]]), np.array(y))
        assert b0 == pytest.approx(intercept, abs=1e-12)
        assert coef[0] == pytest.approx(slope, abs=1e-12)
        assert rank == 2

    @typechecked
    def test_residuals_orthogonal(
        self, regression_data: tuple[np.ndarray, np.ndarray]
    ) -> None:
        """Residuals are orthogonal to every column and sum to zero."""
        X, y = regression_data
        model = fit(LearnerSpec(Family.LINEAR), X, y)
        residual = y - predict(model, X)
        np.testing.assert_allclose(X.T @ residual, 0.0, atol=1e-9)
        assert residual.sum() == pytest.approx(0.0, abs=1e-9)

    @typechecked
    def test_rank_deficient(self) -> None:
        """A duplicated column warns and still fits."""
        x = np.array([1.0, 2.0, 3.0, 4.0])
        with pytest.warns(SingularSystem):
            _, coef, rank = fit_least_squares(np.column_stack([x, x]), 2.0 * x)
        assert rank == 2
        np.testing.assert_allclose(coef, [1.0, 1.0], atol=1e-9)


@typechecked
def test_baseline(regression_data: tuple[np.ndarray, np.ndarray]) -> None:
    """The baseline predicts the training mean everywhere."""
    X, y = regression_data
    model = fit(LearnerSpec(Family.BASELINE), X, y)
    np.testing.assert_allclose(predict(model, X[:5]), y.mean())


class TestTree:
    """Test grow_tree."""

    @typechecked
    def test_step(self) -> None:
        """A single split recovers a step function at the midpoint."""
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        tree = grow_tree(X, np.array([10.0, 10.0, 30.0, 30.0]), max_depth=1)
        assert tree.n_nodes == 3
        assert tree.threshold[0] == pytest.approx(2.5)
        out = tree.predict(np.array([[0.0], [2.4], [2.6]]))
        np.testing.assert_allclose(out, [10.0, 10.0, 30.0])

    @typechecked
    def test_unlimited_depth_interpolates(self) -> None:
        """A fully grown tree fits distinct rows exactly."""
        rng = np.random.default_rng(1)
        X = rng.normal(size=(30, 2))
        y = rng.normal(size=30)
        np.testing.assert_allclose(grow_tree(X, y).predict(X), y)

    @typechecked
    def test_min_samples_leaf(self) -> None:
        """No leaf holds fewer rows than the minimum."""
        rng = np.random.default_rng(2)
        X = rng.normal(size=(50, 2))
        tree = grow_tree(X, rng.normal(size=50), min_samples_leaf=7)
        leaves = tree.predict(X)
        _, counts = np.unique(leaves, return_counts=True)
        assert counts.min() >= 7


class TestGbdt:
    """Test the boosted tree learners."""

    @pytest.mark.parametrize("n_rows", [12, 40])
    @typechecked
    def test_unit_learning_rate_reproduces_targets(self, n_rows: int) -> None:
        """One unregularized stage at learning rate 1 fits every distinct row exactly."""
        rng = np.random.default_rng(3)
        X = rng.normal(size=(n_rows, 2))
        y = rng.normal(size=n_rows)
        spec = LearnerSpec(
            Family.GBDT,
            {
                "n_estimators": 1,
                "learning_rate": 1.0,
                "max_depth": None,
                "min_child_weight": 0.0,
                "min_data_in_leaf": 1,
                "reg_lambda": 0.0,
                "early_stopping_rounds": None,
            },
        )
        np.testing.assert_allclose(predict(fit(spec, X, y), X), y, atol=1e-10)

    @typechecked
    def test_no_validation_keeps_every_stage(
        self, regression_data: tuple[np.ndarray, np.ndarray]
    ) -> None:
        """Without validation rows every stage is kept and the last one is best."""
        X, y = regression_data
        hp = {**_SMALL_HP[Family.GBDT], "early_stopping_rounds": 1}
        model = fit(LearnerSpec(Family.GBDT, hp, seed=1), X, y)
        assert len(model.params.trees) == hp["n_estimators"]
        assert model.best_iteration == hp["n_estimators"]

    @typechecked
    def test_learning_curve(self, regression_data: tuple[np.ndarray, np.ndarray]) -> None:
        """Iterative models log one row per stage and the best validated stage."""
        X, y = regression_data
        model = fit(
            LearnerSpec(Family.GBDT, _SMALL_HP[Family.GBDT], seed=1),
            X[:48],
            y[:48],
            validation=(X[48:], y[48:]),
        )
        curve = learning_curve(model)
        assert curve[TableColumns.ITERATION].tolist() == list(range(1, len(curve) + 1))
        best = model.best_iteration
        assert best is not None
        assert (curve[TableColumns.BEST_ITERATION] == best).all()
        valid = curve[TableColumns.VALID_METRIC].to_numpy()
        assert valid[best - 1] == valid.min()
        assert len(model.params.trees) == best

    @typechecked
    def test_not_iterative(self, regression_data: tuple[np.ndarray, np.ndarray]) -> None:
        """Non-iterative families have no learning curve."""
        X, y = regression_data
        with pytest.raises(NotIterative):
            learning_curve(fit(LearnerSpec(Family.LINEAR), X, y))


@typechecked
def test_network_gradients() -> None:
    """Analytic gradients match central differences."""
    rng = np.random.default_rng(4)
    X = rng.normal(size=(15, 3))
    y = rng.normal(size=15)
    weights = init_network(3, 5, 4, np.random.default_rng(5))
    _, grads = network_loss_and_gradients(weights, X, y)
    eps = 1e-6
    arrays = weights.as_arrays()
    for index, grad in enumerate(grads.as_arrays()):
        flat_grad = grad.ravel()
        for position in range(min(3, flat_grad.size)):
            plus = tuple(array.copy() for array in arrays)
            minus = tuple(array.copy() for array in arrays)
            plus[index].ravel()[position] += eps
            minus[index].ravel()[position] -= eps
            loss_plus, _ = network_loss_and_gradients(
                NetworkWeights.from_arrays(plus), X, y
            )
            loss_minus, _ = network_loss_and_gradients(
                NetworkWeights.from_arrays(minus), X, y
            )
            numeric = (loss_plus - loss_minus) / (2 * eps)
            assert flat_grad[position] == pytest.approx(numeric, rel=1e-4, abs=1e-7)


class TestFitContract:
    """Test the shared fit and predict contract."""

    @pytest.mark.parametrize("family", list(_SMALL_HP))
    @typechecked
    def test_deterministic(
        self, family: Family, regression_data: tuple[np.ndarray, np.ndarray]
    ) -> None:
        """Equal specs and seeds give byte-identical models."""
        X, y = regression_data
        spec = LearnerSpec(family, _SMALL_HP[family], seed=7)
        assert model_json(fit(spec, X, y)) == model_json(fit(spec, X, y, jobs=2))

    @pytest.mark.parametrize("family", list(_SMALL_HP))
    @typechecked
    def test_saved_model_predicts_the_same(
        self, family: Family, regression_data: tuple[np.ndarray, np.ndarray], tmp_path: Path
    ) -> None:
        """A reloaded model predicts exactly like the fitted one."""
        X, y = regression_data
        model = fit(LearnerSpec(family, _SMALL_HP[family], seed=2), X, y)
        loaded = load_model(save_model(model, tmp_path / "model.json"))
        np.testing.assert_array_equal(predict(loaded, X), predict(model, X))

    @typechecked
    def test_width_mismatch(self, regression_data: tuple[np.ndarray, np.ndarray]) -> None:
        """Predicting on another column count is rejected."""
        X, y = regression_data
        model = fit(LearnerSpec(Family.LINEAR), X, y)
        with pytest.raises(WidthMismatch):
            predict(model, X[:, :2])

    @pytest.mark.parametrize(
        "family, hyperparameters",
        [
            (Family.TREE, {"n_estimators": 10}),
            (Family.GBDT, {"learning_rate": 0.0}),
            (Family.NN, {"dropout": 1.0}),
            (Family.RANDOM_FOREST, {"min_samples_split": 1}),
        ],
    )
    @typechecked
    def test_invalid_hyperparameters(self, family: Family, hyperparameters: dict) -> None:
        """Unknown names and out-of-domain values are rejected."""
        with pytest.raises(InvalidHyperparameter):
            LearnerSpec(family, hyperparameters)

    @typechecked
    def test_preset_only_for_gbdt(self) -> None:
        """Presets belong to the gbdt family; gbdt defaults to regularized."""
        assert LearnerSpec(Family.GBDT).label == "gbdt:regularized"
        assert LearnerSpec(Family.GBDT, preset=GbdtPreset.CATEGORICAL).label == (
            "gbdt:categorical"
        )
        with pytest.raises(ValueError):
            LearnerSpec(Family.NN, preset=GbdtPreset.CATEGORICAL)


class TestSpaces:
    """Test the search spaces."""

    @pytest.mark.parametrize("key", list(SPACES))
    @typechecked
    def test_samples_lie_in_space_and_domain(
        self, key: tuple[Family, GbdtPreset | None]
    ) -> None:
        """Sampled values are inside the space and the fit-time domain."""
        family, preset = key
        rng = np.random.default_rng(8)
        space = SPACES[key]
        for _ in range(25):
            draw = sample_hyperparameters(family, preset, rng)
            assert set(draw) == set(space)
            for name, value in draw.items():
                assert space[name].contains(value), name
                assert DOMAINS[name][0](value), name
            LearnerSpec(family, draw, preset=preset)

    @typechecked
    def test_sampling_is_seeded(self) -> None:
        """The same rng state gives the same draw."""
        first = sample_hyperparameters(Family.NN, None, np.random.default_rng(9))
        assert first == sample_hyperparameters(Family.NN, None, np.random.default_rng(9))

    @typechecked
    def test_log_int_range(self) -> None:
        """Log-uniform integer draws stay within the bounds."""
        rng = np.random.default_rng(10)
        draws = [IntRange(50, 500, log=True).sample(rng) for _ in range(500)]
        assert min(draws) >= 50
        assert max(draws) <= 500
        assert np.median(draws) < 275
