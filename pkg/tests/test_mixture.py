import numpy as np
import pytest

from conftest import synthetic_series
from errors import InvalidParameter, MismatchedGrids
from mixture import (
    Ensemble,
    combine_correlations,
    combine_fluctuation_variance,
    combine_norms,
    combine_variances,
    component_variances,
    equivalent_model,
    window_for,
)
from models import NormSeries


def _constant(p1: float, n: int = 20) -> NormSeries:
    return NormSeries(np.arange(n) * 0.1, np.tile([p1, 1.0 - p1], (n, 1)))


class TestEnsemble:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(InvalidParameter):
            Ensemble.from_series([0.5, 0.6], [_constant(0.2), _constant(0.6)])

    def test_negative_weight(self):
        with pytest.raises(InvalidParameter):
            Ensemble.from_series([1.5, -0.5], [_constant(0.2), _constant(0.6)])

    def test_grids_must_match(self):
        with pytest.raises(MismatchedGrids):
            Ensemble.from_series([0.5, 0.5], [_constant(0.2, 20), _constant(0.6, 30)])


class TestCombineNorms:
    def test_single_component_is_identity(self):
        series = synthetic_series(0.5, n_steps=200)
        combined = combine_norms(Ensemble.from_series([1.0], [series]))
        np.testing.assert_array_equal(combined.norms, series.norms)

    @pytest.mark.parametrize("weights, values, expected", [
        ((0.5, 0.5), (0.2, 0.6), 0.4),
        ((0.25, 0.75), (0.0, 1.0), 0.75),
    ])
    def test_convex_combination(self, weights, values, expected):
        ensemble = Ensemble.from_series(weights, [_constant(v) for v in values])
        combined = combine_norms(ensemble)
        np.testing.assert_allclose(combined.norms[:, 0], expected)
        np.testing.assert_allclose(combined.norms.sum(axis=1), 1.0, atol=1e-9)

    def test_commutes_with_restriction(self):
        series = [synthetic_series(0.8, index=1, n_steps=300),
                  synthetic_series(0.2, index=2, n_steps=300)]
        ensemble = Ensemble.from_series([0.3, 0.7], series)
        sliced_first = combine_norms(
            Ensemble.from_series([0.3, 0.7], [s.restrict(50, 120) for s in series]))
        np.testing.assert_allclose(combine_norms(ensemble).restrict(50, 120).norms,
                                   sliced_first.norms, rtol=0, atol=1e-15)


class TestCombineVariances:
    def test_worked_value_is_exact(self):
        assert combine_variances([0.25, 0.75], [[4e-4], [0.0]])[0] == 1e-4

    def test_single_component(self):
        series = synthetic_series(0.8)
        ensemble = Ensemble.from_series([1.0], [series])
        combined = combine_fluctuation_variance(ensemble, series.spacing)
        np.testing.assert_allclose(combined, component_variances(ensemble, series.spacing)[0])

    def test_matches_pooled_increments(self):
        weights = np.array([0.25, 0.75])
        series = [synthetic_series(0.8, index=1), synthetic_series(0.2, index=2)]
        combined = combine_fluctuation_variance(Ensemble.from_series(weights, series),
                                                series[0].spacing)[0]
        increments = np.stack([np.diff(s.norms[:, 0]) for s in series])
        pick = np.random.default_rng(11).choice(2, size=increments.shape[1], p=weights)
        pooled = increments[pick, np.arange(increments.shape[1])] ** 2
        error = pooled.std(ddof=1) / np.sqrt(pooled.size)
        assert combined == pytest.approx(pooled.mean(), abs=4.0 * error)

    def test_equal_components(self):
        series = [synthetic_series(0.5, index=i) for i in range(2)]
        ensemble = Ensemble.from_series([0.5, 0.5], series)
        combined = combine_fluctuation_variance(ensemble, series[0].spacing)[0]
        expected = 0.5 * series[0].spacing
        assert combined == pytest.approx(expected, rel=0.1)


class TestEquivalentModel:
    def test_weighted_coefficient(self):
        series = [synthetic_series(0.8, index=3), synthetic_series(0.2, index=4)]
        ensemble = Ensemble.from_series([0.25, 0.75], series)
        model = equivalent_model(ensemble, series[0].spacing)
        assert model.kind == "constant"
        assert model.base[0, 1] == pytest.approx(0.35, rel=0.1)
        assert model.base[0, 0] == 0.0

    def test_full_matrix_combination(self):
        series = [synthetic_series(0.8, index=5)]
        matrix = combine_correlations(Ensemble.from_series([1.0], series), series[0].spacing)
        assert matrix.shape == (2, 2)
        assert matrix[0, 1] == pytest.approx(matrix[1, 0])


class TestWindowFor:
    def test_multiple_of_spacing(self):
        assert window_for(_constant(0.5), 0.3) == 3

    def test_not_a_multiple(self):
        with pytest.raises(InvalidParameter):
            window_for(_constant(0.5), 0.25)
