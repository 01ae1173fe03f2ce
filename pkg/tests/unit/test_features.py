"""Unit tests for VIF screening, golden features, correlation and overhang."""

import logging
import math

import numpy as np
import pytest
from typeguard import typechecked

from fatigue_automl.lib.constants import (
    AuditPolicy,
    AuditReason,
    Columns,
    GoldenOp,
    TableColumns,
)
from fatigue_automl.lib.features.correlation import correlation_matrix
from fatigue_automl.lib.features.engineered import add_overhang, derive_overhang
from fatigue_automl.lib.features.golden import (
    GoldenAugmenter,
    GoldenDiscovery,
    GoldenFeature,
    apply_recipe,
    audit_golden,
    candidate_pairs,
    discover_golden,
    golden_frame,
    included_features,
    selected_count,
)
from fatigue_automl.lib.features.vif import compute_vif, vif_rounds_frame, vif_screen
from fatigue_automl.lib.tabular.dataset import Dataset
from fatigue_automl.lib.tabular.feature_schema import default_schema

SUB = GoldenOp.SUBTRACT
DIV = GoldenOp.DIVIDE


@typechecked
def _collinear_matrix(n: int = 200, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x1 = rng.normal(size=n)
    x2 = rng.normal(size=n)
    x3 = x1 + x2 + 0.05 * rng.normal(size=n)
    return np.column_stack([x1, x2, x3, rng.normal(size=n)])


class TestComputeVif:
    """Test compute_vif."""

    @typechecked
    def test_two_columns(self) -> None:
        """With two columns both VIFs are 1 / (1 - r^2)."""
        rng = np.random.default_rng(1)
        a = rng.normal(size=100)
        b = 0.6 * a + rng.normal(size=100)
        r = np.corrcoef(a, b)[0, 1]
        entries = compute_vif(np.column_stack([a, b]), ["a", "b"])
        for entry in entries:
            assert entry.vif == pytest.approx(1.0 / (1.0 - r**2), rel=1e-9)
            assert entry.r_squared == pytest.approx(r**2, rel=1e-9)

    @typechecked
    def test_independent_columns(self) -> None:
        """Mutually independent columns all have a VIF near 1."""
        X = np.random.default_rng(21).normal(size=(10000, 3))
        for entry in compute_vif(X, ["a", "b", "c"]):
            assert 1.0 <= entry.vif <= 1.1

    @typechecked
    def test_sorted_descending(self) -> None:
        """Entries come highest VIF first."""
        entries = compute_vif(_collinear_matrix(), ["x1", "x2", "x3", "x4"])
        vifs = [entry.vif for entry in entries]
        assert vifs == sorted(vifs, reverse=True)
        assert entries[-1].feature == "x4"

    @typechecked
    def test_exact_collinearity(self, caplog: pytest.LogCaptureFixture) -> None:
        """An exact linear combination gives an infinite VIF and a warning."""
        rng = np.random.default_rng(2)
        a, b = rng.normal(size=50), rng.normal(size=50)
        with caplog.at_level(logging.WARNING):
            entries = compute_vif(np.column_stack([a, b, a + b]), ["a", "b", "c"])
        assert all(math.isinf(entry.vif) for entry in entries)
        assert "perfect fit" in caplog.text

    @typechecked
    def test_too_few_rows(self) -> None:
        """n must exceed d."""
        with pytest.raises(ValueError):
            compute_vif(np.ones((2, 2)), ["a", "b"])


class TestVifScreen:
    """Test vif_screen."""

    @typechecked
    def test_drops_until_threshold(self) -> None:
        """One of the collinear triple goes; the rest are under the threshold."""
        names = ["x1", "x2", "x3", "x4"]
        screen = vif_screen(_collinear_matrix(), names, threshold=5.0)
        assert len(screen.dropped) == 1
        assert screen.dropped[0] in {"x1", "x2", "x3"}
        assert set(screen.kept) | set(screen.dropped) == set(names)
        assert all(entry.vif <= 5.0 for entry in screen.rounds[-1])
        assert len(screen.rounds) == 2

    @typechecked
    def test_independent_columns_kept(self) -> None:
        """Screening independent columns drops nothing."""
        X = np.random.default_rng(22).normal(size=(10000, 3))
        screen = vif_screen(X, ["a", "b", "c"], 5.0)
        assert screen.kept == ("a", "b", "c")
        assert screen.dropped == ()

    @typechecked
    def test_rounds_frame(self) -> None:
        """The rounds table holds one row per feature per round."""
        screen = vif_screen(_collinear_matrix(), ["x1", "x2", "x3", "x4"], threshold=5.0)
        frame = vif_rounds_frame(screen)
        assert len(frame) == 4 + 3
        assert frame[TableColumns.ROUND].tolist() == [1] * 4 + [2] * 3

    @typechecked
    def test_bad_threshold(self) -> None:
        """Thresholds at or below 1 are rejected."""
        with pytest.raises(ValueError):
            vif_screen(_collinear_matrix(), ["x1", "x2", "x3", "x4"], threshold=1.0)


@pytest.mark.parametrize(
    "n_features, n_candidates, expected",
    [(20, None, 5), (100, None, 5), (250, None, 13), (300, None, 15), (2000, None, 50)]
    + [(20, 3, 3), (2000, 40, 40)],
)
@typechecked
def test_selected_count(n_features: int, n_candidates: int | None, expected: int) -> None:
    """5% of the features, rounded half up, clamped to [5, 50] and the candidates."""
    assert selected_count(n_features, n_candidates) == expected


@typechecked
def test_candidate_pairs() -> None:
    """One difference in lexicographic order and both ratios per pair."""
    assert candidate_pairs(["b", "a"]) == [("a", "b", SUB), ("a", "b", DIV), ("b", "a", DIV)]
    assert len(candidate_pairs(["a", "b", "c", "d"])) == 3 * 6


class TestApplyRecipe:
    """Test apply_recipe."""

    @typechecked
    def test_values(self) -> None:
        """Differences and ratios of the named columns."""
        X = np.array([[6.0, 2.0], [1.0, -4.0]])
        difference = GoldenFeature("a", "b", SUB, 0.0)
        ratio = GoldenFeature("a", "b", DIV, 0.0)
        np.testing.assert_allclose(apply_recipe(difference, X, ["a", "b"]), [4.0, 5.0])
        np.testing.assert_allclose(apply_recipe(ratio, X, ["a", "b"]), [3.0, -0.25])

    @typechecked
    def test_zero_denominator(self) -> None:
        """A zero denominator is replaced by +1e-9."""
        feature = GoldenFeature("a", "b", DIV, 0.0)
        out = apply_recipe(feature, np.array([[1.0, 0.0]]), ["a", "b"])
        assert out[0] == pytest.approx(1e9)

    @typechecked
    def test_same_operands(self) -> None:
        """Operands must differ."""
        with pytest.raises(ValueError):
            GoldenFeature("a", "a", SUB, 0.0)


class TestDiscoverGolden:
    """Test discover_golden."""

    @typechecked
    def test_planted_ratio_ranks_first(self) -> None:
        """A target driven by w / t ranks that ratio (or its reciprocal) first."""
        rng = np.random.default_rng(3)
        n = 400
        w = rng.uniform(40.0, 400.0, size=n)
        t = rng.uniform(5.0, 40.0, size=n)
        h = rng.uniform(20.0, 150.0, size=n)
        y = np.log10(w / t)
        discovery = discover_golden(np.column_stack([w, t, h]), y, ["w", "t", "h"], seed=0)
        assert discovery.candidates[0].recipe in {"w / t", "t / w"}
        assert len(discovery.candidates) == 9
        assert discovery.n_selected == 5
        scores = [feature.score for feature in discovery.candidates]
        assert scores == sorted(scores)

    @typechecked
    def test_jobs_do_not_change_result(self) -> None:
        """Thread count leaves the ranking unchanged."""
        X = _collinear_matrix(n=60, seed=4)
        y = X[:, 0] - X[:, 3]
        names = ["x1", "x2", "x3", "x4"]
        assert discover_golden(X, y, names, seed=1, jobs=1) == discover_golden(
            X, y, names, seed=1, jobs=2
        )

    @typechecked
    def test_too_few_rows(self) -> None:
        """Fewer than 20 rows are rejected."""
        with pytest.raises(ValueError):
            discover_golden(np.ones((10, 2)), np.ones(10), ["a", "b"], seed=0)


class TestAuditGolden:
    """Test audit_golden."""

    @pytest.mark.parametrize(
        "feature, policy, reasons",
        [
            (
                GoldenFeature(Columns.BASE_PLATE_WIDTH, Columns.BASE_PLATE_LENGTH, DIV, 0.0),
                AuditPolicy.STRICT,
                [],
            ),
            (
                GoldenFeature(Columns.YIELD_STRENGTH, Columns.BASE_PLATE_THICKNESS, DIV, 0.0),
                AuditPolicy.STRICT,
                [AuditReason.UNIT_MISMATCH],
            ),
            (
                GoldenFeature(Columns.YIELD_STRENGTH, Columns.BASE_PLATE_THICKNESS, DIV, 0.0),
                AuditPolicy.LENIENT,
                [],
            ),
            (
                GoldenFeature(Columns.YIELD_STRENGTH, Columns.BASE_PLATE_THICKNESS, SUB, 0.0),
                AuditPolicy.LENIENT,
                [AuditReason.UNIT_MISMATCH],
            ),
            (
                GoldenFeature(Columns.SCALE, Columns.BASE_PLATE_THICKNESS, SUB, 0.0),
                AuditPolicy.STRICT,
                [AuditReason.INDICATOR_ARITHMETIC, AuditReason.MIXED_KIND],
            ),
            (
                GoldenFeature(f"{Columns.POST_TREAT}=TIG dressing", Columns.SCALE, DIV, 0.0),
                AuditPolicy.STRICT,
                [AuditReason.INDICATOR_ARITHMETIC, AuditReason.MIXED_KIND],
            ),
        ],
    )
    @typechecked
    def test_reasons(
        self, feature: GoldenFeature, policy: AuditPolicy, reasons: list[AuditReason]
    ) -> None:
        """Each recipe gets the expected flags."""
        flags = audit_golden([feature], default_schema(), policy)
        assert [flag.reason for flag in flags] == reasons

    @typechecked
    def test_flagged_are_excluded(self) -> None:
        """Flagged selected features are not included, but stay in the table."""
        good = GoldenFeature(Columns.BASE_PLATE_WIDTH, Columns.BASE_PLATE_THICKNESS, DIV, 0.1)
        bad = GoldenFeature(Columns.SCALE, Columns.BASE_PLATE_THICKNESS, SUB, 0.2)
        discovery = GoldenDiscovery(candidates=(good, bad), n_selected=2)
        flags = audit_golden(discovery.candidates, default_schema())
        assert included_features(discovery, flags) == (good,)
        frame = golden_frame(discovery, flags)
        assert frame[TableColumns.INCLUDED].tolist() == [True, False]
        assert frame[TableColumns.FLAGS].tolist() == ["", "indicator_arithmetic;mixed_kind"]


@typechecked
def test_golden_augmenter() -> None:
    """Appended golden columns are standardized with the training moments."""
    X = np.array([[2.0, 1.0], [4.0, 1.0], [9.0, 3.0]])
    augmenter = GoldenAugmenter.fit([GoldenFeature("a", "b", DIV, 0.0)], X, ["a", "b"])
    column = augmenter.transform(X, ["a", "b"])[:, 0]
    np.testing.assert_allclose(column.mean(), 0.0, atol=1e-12)
    np.testing.assert_allclose(column.std(ddof=1), 1.0)
    assert augmenter.names == ["a / b"]
    assert GoldenAugmenter.from_dict(augmenter.to_dict()) == augmenter


class TestCorrelation:
    """Test correlation_matrix."""

    @typechecked
    def test_constant_column_excluded(self, caplog: pytest.LogCaptureFixture) -> None:
        """Constant columns are left out and reported."""
        X = np.array([[1.0, 2.0, 5.0], [2.0, 4.0, 5.0], [3.0, 7.0, 5.0]])
        with caplog.at_level(logging.WARNING):
            result = correlation_matrix(X, ["a", "b", "c"])
        assert result.names == ("a", "b")
        assert len(result.constant_columns) == 1
        assert "Column c is constant" in caplog.text
        np.testing.assert_allclose(np.diag(result.matrix), 1.0)
        np.testing.assert_allclose(result.matrix, result.matrix.T)

    @typechecked
    def test_independent_columns(self) -> None:
        """Independent standard-normal columns are nearly uncorrelated."""
        X = np.random.default_rng(23).normal(size=(10000, 3))
        matrix = correlation_matrix(X, ["a", "b", "c"]).matrix
        assert (np.abs(matrix[~np.eye(3, dtype=bool)]) < 0.05).all()

    @pytest.mark.parametrize("factor, expected", [(2.0, 1.0), (-1.0, -1.0)])
    @typechecked
    def test_linear_dependence(self, factor: float, expected: float) -> None:
        """A scaled copy correlates at +1 or -1 by the sign of the scale."""
        x = np.random.default_rng(24).normal(size=50)
        result = correlation_matrix(np.column_stack([x, factor * x]), ["x1", "x2"])
        assert result.matrix[0, 1] == pytest.approx(expected, abs=1e-12)


class TestOverhang:
    """Test derive_overhang and add_overhang."""

    @typechecked
    def test_value(self) -> None:
        """Overhang is half the width left over by the stiffener."""
        assert float(derive_overhang(100.0, 40.0)) == pytest.approx(30.0)
        assert derive_overhang(np.array([40.0]), np.array([100.0]))[0] == pytest.approx(-30.0)

    @typechecked
    def test_replaces_columns(self, synthetic_ds: Dataset) -> None:
        """The derived column replaces w_BP and l_S."""
        ds = add_overhang(synthetic_ds)
        assert Columns.OVERHANG in ds
        assert Columns.BASE_PLATE_WIDTH not in ds
        assert Columns.STIFFENER_LENGTH not in ds
        np.testing.assert_allclose(
            ds.observed(Columns.OVERHANG),
            (
                synthetic_ds.observed(Columns.BASE_PLATE_WIDTH)
                - synthetic_ds.observed(Columns.STIFFENER_LENGTH)
            )
            / 2.0,
        )
