import numpy as np
import pytest

from conftest import synthetic_series
from errors import InvalidParameter, SeriesTooShort
from fluctuations import estimate_correlations
from models import NormSeries


def _alternating(n: int, dt: float = 1.0) -> NormSeries:
    p1 = np.where(np.arange(n) % 2 == 0, 0.5, 0.6)
    return NormSeries(np.arange(n) * dt, np.column_stack([p1, 1.0 - p1]))


class TestEstimateCorrelations:
    def test_constant_series_gives_zero(self):
        series = NormSeries(np.arange(50) * 0.1, np.tile([0.3, 0.7], (50, 1)))
        estimate = estimate_correlations(series, window=1)
        assert np.all(estimate.matrix == 0.0)
        assert np.all(estimate.standard_errors == 0.0)

    def test_hand_computed_increments(self):
        estimate = estimate_correlations(_alternating(11), window=1)
        assert estimate.n_increments == 10
        assert estimate.a12 == pytest.approx(0.01)
        assert estimate.matrix[0, 0] == pytest.approx(0.01)
        assert estimate.a12_error == pytest.approx(0.0, abs=1e-15)

    def test_window_skips_samples(self):
        estimate = estimate_correlations(_alternating(40), window=2)
        assert estimate.window_dt == pytest.approx(2.0)
        assert estimate.a12 == pytest.approx(0.0, abs=1e-15)

    def test_recovers_synthetic_coefficient(self):
        estimate = estimate_correlations(synthetic_series(0.8), window=1)
        assert estimate.a12 == pytest.approx(0.8, rel=0.1)
        assert 0.0 < estimate.a12_error < 0.1 * estimate.a12

    def test_increment_variances(self):
        estimate = estimate_correlations(_alternating(11), window=1)
        np.testing.assert_allclose(estimate.increment_variances(), [0.01, 0.01])

    def test_series_too_short(self):
        with pytest.raises(SeriesTooShort):
            estimate_correlations(_alternating(9), window=1)

    def test_bad_window(self):
        with pytest.raises(InvalidParameter):
            estimate_correlations(_alternating(20), window=0)
