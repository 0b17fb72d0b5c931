import logging
from typing import Optional, Sequence

from ensemble import simulate_ensemble, summarize_records
from models import AbsorptionRecord, CorrelationModel, NormVector
from runners.common import RunResult, born_checks, born_results, flag_check, records_frame, \
    tolerance_check
from scenario import build_model, build_norm_vector
from schemas import DiffusionScenario

logger = logging.getLogger(__name__)


def two_channel_mean_time(p0: NormVector, model: CorrelationModel) -> Optional[float]:
    """Exact mean hitting time p_1 p_2 / A, available for two channels and a constant A."""
    if p0.n_channels != 2 or model.kind != "constant" or model.base[0, 1] <= 0.0:
        return None
    return float(p0.values[0] * p0.values[1] / model.base[0, 1])


def finality_violations(records: Sequence[AbsorptionRecord]) -> int:
    """Completed trajectories that did not end on a vertex with every loser retired once."""
    bad = 0
    for record in records:
        if record.timed_out:
            continue
        channels = [channel for channel, _ in record.absorption_order]
        times = [t for _, t in record.absorption_order]
        ok = (
            record.is_vertex()
            and len(channels) == len(record.final_values) - 1
            and len(set(channels)) == len(channels)
            and record.winner not in channels
            and all(a <= b for a, b in zip(times, times[1:]))
        )
        bad += not ok
    return bad


def run(scenario: DiffusionScenario, workers: int = 1) -> RunResult:
    block = scenario.diffusion
    p0 = build_norm_vector(block.p0)
    model = build_model(block.model, p0.n_channels)

    records = simulate_ensemble(p0, model, block.n_trajectories, block.dt, block.t_max,
                                scenario.seed, workers=workers, theta=block.theta,
                                max_depth=block.max_depth)
    report = summarize_records(p0, records)
    violations = finality_violations(records)
    predicted = two_channel_mean_time(p0, model)
    logger.info(f"Diffusion: frequencies={report.frequencies}, "
                f"mean hitting time={report.mean_hitting_time:.6g}")

    results = {
        "born_report": born_results(report),
        "finality_violations": violations,
        "predicted_mean_hitting_time": predicted,
    }

    acceptance = scenario.acceptance
    checks = []
    if acceptance.born_sigma is not None:
        checks.extend(born_checks(report, acceptance.born_sigma))
    if acceptance.mean_hitting_time is not None:
        expected = acceptance.mean_hitting_time
        checks.append(tolerance_check("mean_hitting_time", report.mean_hitting_time, expected,
                                      acceptance.mean_hitting_time_rel_tol * expected))
    if acceptance.require_all_absorbed:
        checks.append(tolerance_check("timed_out_trajectories", report.n_timeouts, 0, 0))
        checks.append(flag_check("absorption_finality", violations == 0, violations))

    return RunResult(results=results, checks=checks,
                     tables={"trajectories.csv": records_frame(records)})
