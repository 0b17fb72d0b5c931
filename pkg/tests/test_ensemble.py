import math

import numpy as np
import pytest

from ensemble import run_ensemble, simulate_ensemble, summarize_records
from errors import InvalidParameter
from models import AbsorptionRecord, CorrelationModel
from simplex_diffusion import new_norm_vector


def _record(i, winner, t=1.0, timed_out=False):
    return AbsorptionRecord(
        trajectory_id=i,
        winner=winner,
        hitting_time=t,
        steps=int(t * 1000),
        absorption_order=() if winner is None else ((1 - winner, t),),
        final_values=(0.5, 0.5) if winner is None else
        tuple(1.0 if c == winner else 0.0 for c in range(2)),
        timed_out=timed_out,
    )


class TestSimulateEnsemble:
    def test_records_sorted_and_absorbed(self, unit_model):
        records = simulate_ensemble(new_norm_vector([0.3, 0.7]), unit_model, 200, 1e-3, 1e3,
                                    seed=1)
        assert [r.trajectory_id for r in records] == list(range(200))
        assert all(r.is_vertex() for r in records)

    def test_worker_count_does_not_change_records(self, unit_model):
        p0 = new_norm_vector([0.2, 0.8])
        serial = simulate_ensemble(p0, unit_model, 48, 1e-3, 1e3, seed=5, workers=1)
        parallel = simulate_ensemble(p0, unit_model, 48, 1e-3, 1e3, seed=5, workers=2)
        assert serial == parallel

    def test_rejects_empty_ensemble(self, unit_model):
        with pytest.raises(InvalidParameter):
            simulate_ensemble(new_norm_vector([0.5, 0.5]), unit_model, 0, 1e-3, 1e3, seed=0)


class TestSummarizeRecords:
    def test_frequencies_and_errors(self):
        records = [_record(0, 0), _record(1, 0), _record(2, 1), _record(3, 1, t=3.0)]
        report = summarize_records(new_norm_vector([0.5, 0.5]), records)
        assert report.frequencies == (0.5, 0.5)
        assert report.standard_errors == pytest.approx((0.25, 0.25))
        assert report.mean_hitting_time == pytest.approx(1.5)
        assert report.hitting_time_stddev == pytest.approx(1.0)
        assert report.n_completed == 4
        assert report.within(0.0)

    def test_timeouts_are_excluded(self):
        records = [_record(0, 0), _record(1, None, t=10.0, timed_out=True), _record(2, 1)]
        report = summarize_records(new_norm_vector([0.5, 0.5]), records)
        assert report.n_trajectories == 3
        assert report.n_completed == 2
        assert report.n_timeouts == 1
        assert report.mean_hitting_time == pytest.approx(1.0)

    def test_input_order_is_irrelevant(self):
        records = [_record(i, i % 2, t=0.1 * (i + 1)) for i in range(6)]
        p0 = new_norm_vector([0.5, 0.5])
        assert summarize_records(p0, records) == summarize_records(p0, records[::-1])


class TestRunEnsemble:
    def test_born_frequencies_small(self, unit_model):
        report = run_ensemble(new_norm_vector([0.3, 0.7]), unit_model, 2000, 1e-3, 1e3,
                              seed=42)
        assert report.n_timeouts == 0
        assert report.within(4.0)

    def test_mean_hitting_time_small(self, unit_model):
        report = run_ensemble(new_norm_vector([0.5, 0.5]), unit_model, 2000, 1e-3, 1e3,
                              seed=3)
        assert report.mean_hitting_time == pytest.approx(0.25, rel=0.1)

    def test_deviation_for_certain_channel(self):
        report = run_ensemble(new_norm_vector([1.0, 0.0]), CorrelationModel.constant(2, 1.0),
                              10, 1e-3, 1e3, seed=0)
        assert report.frequencies == (1.0, 0.0)
        assert report.mean_hitting_time == 0.0
        assert np.all(report.deviations() == 0.0)


@pytest.mark.slow
class TestBornRuleAtScale:
    @pytest.mark.parametrize("p0", [(0.3, 0.7), (0.5, 0.5), (0.2, 0.3, 0.5),
                                    (0.1, 0.2, 0.3, 0.4)])
    def test_frequencies_match_initial_norms(self, p0):
        model = CorrelationModel.constant(len(p0), 1.0)
        report = run_ensemble(new_norm_vector(p0), model, 100_000, 1e-3, 1e3, seed=42,
                              workers=4)
        assert report.n_timeouts == 0
        assert report.within(3.0)

    @pytest.mark.parametrize("x", [0.2, 0.5, 0.8])
    def test_mean_hitting_time(self, x):
        report = run_ensemble(new_norm_vector([x, 1.0 - x]), CorrelationModel.constant(2, 1.0),
                              10_000, 1e-3, 1e3, seed=42, workers=4)
        assert report.mean_hitting_time == pytest.approx(x * (1.0 - x), rel=0.05)
        assert math.isfinite(report.hitting_time_stddev)


class TestModelKinds:
    def test_time_ramp_keeps_born_frequencies(self):
        model = CorrelationModel.time_ramp(1.0 - np.eye(2), 0.5)
        report = run_ensemble(new_norm_vector([0.3, 0.7]), model, 2000, 1e-3, 1e3, seed=8)
        assert report.n_timeouts == 0
        assert report.within(4.0)
        # A = 1 is reached only after the ramp, so absorption takes longer than x(1-x)
        assert report.mean_hitting_time > 0.21

    @pytest.mark.slow
    def test_bilinear_keeps_born_frequencies(self):
        report = run_ensemble(new_norm_vector([0.3, 0.7]), CorrelationModel.bilinear(2, 4.0),
                              2000, 0.05, 1e3, seed=8, workers=4)
        assert report.n_timeouts == 0
        assert report.within(4.0)
