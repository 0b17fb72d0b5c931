"""Quantum track pattern to stochastic reduction.

The norm series of a two-channel quantum run gives an estimate of A_12; a constant
model with that coefficient then drives an ensemble started from (|c1|^2, |c2|^2).
"""
import logging

from ensemble import simulate_ensemble, summarize_records
from fluctuations import estimate_correlations
from models import CorrelationModel
from runners.common import RunResult, born_checks, born_results, flag_check, records_frame, \
    tolerance_check
from runners.quantum_runner import evolve_block
from scenario import coefficients
from schemas import BridgeScenario
from simplex_diffusion import new_norm_vector

logger = logging.getLogger(__name__)


def run(scenario: BridgeScenario, workers: int = 1) -> RunResult:
    block = scenario.bridge
    quantum = evolve_block(block.quantum).run
    estimate = estimate_correlations(quantum.series, block.window)
    a12, a12_error = estimate.a12, estimate.a12_error
    significance = a12 / a12_error if a12_error > 0.0 else float("inf")
    logger.info(f"Estimated A_12 = {a12:.6g} +/- {a12_error:.2g} from "
                f"{estimate.n_increments} increments")

    results = {
        "a12": a12,
        "a12_error": a12_error,
        "a12_significance": significance,
        "n_increments": estimate.n_increments,
        "window_dt": estimate.window_dt,
        "correlations": estimate.matrix.tolist(),
    }
    tables = {"quantum_series.csv": quantum.series_frame()}

    acceptance = scenario.acceptance
    checks = []
    if acceptance.min_correlation_sigma is not None:
        checks.append(flag_check("a12_significance",
                                 significance >= acceptance.min_correlation_sigma, significance))

    if a12 <= 0.0:
        logger.warning(f"Estimated A_12 = {a12:.3g} is not positive; skipping the ensemble run")
        if acceptance.born_sigma is not None:
            checks.append(tolerance_check("born_ensemble_run", a12, None, None))
        return RunResult(results=results, checks=checks, tables=tables)

    c1, c2 = coefficients(block.quantum)
    p0 = new_norm_vector([abs(c1) ** 2, abs(c2) ** 2])
    model = CorrelationModel.constant(2, a12)
    records = simulate_ensemble(p0, model, block.n_trajectories, block.dt_scale / a12,
                                block.t_max_scale / a12, scenario.seed, workers=workers,
                                theta=block.theta, max_depth=block.max_depth)
    report = summarize_records(p0, records)
    results["born_report"] = born_results(report)
    tables["trajectories.csv"] = records_frame(records)
    if acceptance.born_sigma is not None:
        checks.extend(born_checks(report, acceptance.born_sigma))
    return RunResult(results=results, checks=checks, tables=tables)
