import logging
import math

from ensemble import run_ensemble
from errors import InsufficientDecay
from fokker_planck import FpGrid, mean_absorption_time, smallest_eigenvalue, solve, \
    survival_decay_rate
from models import CorrelationModel
from runners.common import RunResult, born_results, tolerance_check
from schemas import FokkerPlanckScenario
from simplex_diffusion import new_norm_vector

logger = logging.getLogger(__name__)


def run(scenario: FokkerPlanckScenario, workers: int = 1) -> RunResult:
    block = scenario.fokker_planck
    grid = FpGrid.from_correlation(block.a, block.n_cells)
    solution = solve(grid, block.x0, block.t_end, block.dt, scheme=block.scheme,
                     n_snapshots=block.n_snapshots)
    x0 = solution.x0
    eigenvalue = smallest_eigenvalue(grid)
    mass_error = float(abs(solution.total_mass() - 1.0).max())

    try:
        decay_rate = survival_decay_rate(solution)
        mean_time = mean_absorption_time(solution, decay_rate)
    except InsufficientDecay as exc:
        logger.warning(f"Skipping decay analysis: {exc.detail}")
        decay_rate = None
        mean_time = None

    results = {
        "x0": x0,
        "absorbed_mass": [solution.absorbed_mass_0, solution.absorbed_mass_1],
        "interior_mass": float(solution.interior_mass[-1]),
        "max_mass_error": mass_error,
        "smallest_eigenvalue": eigenvalue,
        "slowest_decay_time": 1.0 / eigenvalue,
        "decay_rate": decay_rate,
        "mean_absorption_time": mean_time,
        "exact_mean_hitting_time": x0 * (1.0 - x0) / block.a,
    }

    report = None
    if block.compare_trajectories:
        # x = p_1 reaching 1 means channel 0 wins
        p0 = new_norm_vector([x0, 1.0 - x0])
        model = CorrelationModel.constant(2, block.a)
        report = run_ensemble(p0, model, block.compare_trajectories, block.compare_dt,
                              t_max=1e3 / block.a, seed=scenario.seed, workers=workers)
        results["monte_carlo"] = born_results(report)

    acceptance = scenario.acceptance
    checks = []
    if acceptance.split_tolerance is not None:
        checks.append(tolerance_check("absorbed_mass_at_1", solution.absorbed_mass_1, x0,
                                      acceptance.split_tolerance))
        checks.append(tolerance_check("absorbed_mass_at_0", solution.absorbed_mass_0, 1.0 - x0,
                                      acceptance.split_tolerance))
    if acceptance.mass_tolerance is not None:
        checks.append(tolerance_check("mass_conservation", mass_error, 0.0,
                                      acceptance.mass_tolerance))
    if acceptance.decay_rate_rel_tol is not None:
        checks.append(tolerance_check("decay_rate", decay_rate, eigenvalue,
                                      acceptance.decay_rate_rel_tol * eigenvalue))
    if acceptance.cross_sigma is not None and report is not None:
        se = math.sqrt(x0 * (1.0 - x0) / max(report.n_completed, 1))
        split = acceptance.split_tolerance or 0.0
        checks.append(tolerance_check("monte_carlo_split", report.frequencies[0],
                                      solution.absorbed_mass_1,
                                      acceptance.cross_sigma * se + split))

    tables = {"fp_density.csv": solution.density_frame(), "fp_mass.csv": solution.mass_frame()}
    return RunResult(results=results, checks=checks, tables=tables)
