import logging
from typing import List

from ensemble import run_ensemble
from mixture import Ensemble, combine_norms, combine_variances, component_variances, \
    equivalent_model
from models import NormSeries
from runners.common import RunResult, born_checks, born_results, flag_check
from runners.quantum_runner import evolve_block
from scenario import build_model, build_norm_vector
from schemas import MixtureScenario
from simplex_diffusion import new_norm_vector, simulate_path, trajectory_rng

logger = logging.getLogger(__name__)


def component_series(scenario: MixtureScenario) -> List[NormSeries]:
    """Norm series of every component; synthetic component alpha draws from stream (seed, alpha)."""
    series = []
    for alpha, component in enumerate(scenario.mixture.components):
        if component.source == "synthetic":
            p0 = build_norm_vector(component.p0)
            model = build_model(component.model, p0.n_channels)
            series.append(simulate_path(p0, model, component.dt, component.n_steps,
                                        trajectory_rng(scenario.seed, alpha)))
        else:
            series.append(evolve_block(component.quantum).run.series)
    return series


def run(scenario: MixtureScenario, workers: int = 1) -> RunResult:
    block = scenario.mixture
    weights = [c.weight for c in block.components]
    ensemble = Ensemble.from_series(weights, component_series(scenario))
    combined = combine_norms(ensemble)

    dt = block.variance_dt or combined.spacing
    variances = component_variances(ensemble, dt)
    pooled = combine_variances(ensemble.weights, variances)
    model = equivalent_model(ensemble, dt)
    logger.info(f"Mixture of {len(weights)} component(s): pooled variances {pooled.tolist()}")

    results = {
        "weights": list(weights),
        "variance_dt": dt,
        "component_variances": variances.tolist(),
        "combined_variances": pooled.tolist(),
        "equivalent_correlations": model.base.tolist(),
        "initial_norms": combined.norms[0].tolist(),
        "final_norms": combined.norms[-1].tolist(),
    }

    checks = []
    peak = float(model.base.max())
    if block.n_trajectories and peak > 0.0:
        p0 = new_norm_vector(combined.norms[0] / combined.norms[0].sum())
        report = run_ensemble(p0, model, block.n_trajectories, block.dt_scale / peak,
                              block.t_max_scale / peak, scenario.seed, workers=workers)
        results["born_report"] = born_results(report)
        if scenario.acceptance.born_sigma is not None:
            checks.extend(born_checks(report, scenario.acceptance.born_sigma))
    elif block.n_trajectories:
        logger.warning("Equivalent model has no fluctuations; skipping the ensemble run")
        if scenario.acceptance.born_sigma is not None:
            checks.append(flag_check("born_ensemble_run", False, peak))

    frame = combined.to_frame()
    return RunResult(results=results, checks=checks, tables={"mixture_norms.csv": frame})
