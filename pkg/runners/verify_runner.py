"""Acceptance suite behind the `verify` subcommand.

Each case is an ordinary scenario (or a direct module call) whose checks are collected
under a case label; the suite passes when every check passes.
"""
import logging
import math
import tempfile
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from fluctuations import estimate_correlations
from mixture import Ensemble, combine_fluctuation_variance, combine_variances
from models import CorrelationModel, NormSeries
from outputs import write_outputs
from runners import execute
from runners.common import RunResult, tolerance_check
from schemas import (
    BridgeScenario,
    DiffusionScenario,
    FokkerPlanckScenario,
    QuantumScenario,
    ToleranceCheck,
)
from simplex_diffusion import new_norm_vector, simulate_path, trajectory_rng

logger = logging.getLogger(__name__)

BORN_CASES = [(0.3, 0.7), (0.5, 0.5), (0.2, 0.3, 0.5), (0.1, 0.2, 0.3, 0.4)]
HITTING_CASES = [0.2, 0.5, 0.8]
SPLIT_CASES = [0.3, 0.5]
RABI_CASES = [
    (0.5, (1.0, 0.0), (0.0, 0.0)),
    (0.3, (0.6, 0.0), (0.8, 0.0)),
    (1.0, (math.sqrt(0.5), 0.0), (0.0, math.sqrt(0.5))),
]

# packet oscillating in a harmonic well, away from the grid edges
_PACKET = {"center": 2.0, "width": 0.5, "momentum": 0.0}
_COEFFS = {"c1": (0.6, 0.0), "c2": (0.8, 0.0)}


def _diffusion(p0, n: int, seed: int, **acceptance) -> DiffusionScenario:
    return DiffusionScenario.model_validate({
        "kind": "diffusion",
        "seed": seed,
        "diffusion": {"p0": list(p0), "model": {"a": 1.0}, "n_trajectories": n},
        "acceptance": acceptance,
    })


def _quantum(seed: int, coupling: dict, n_steps: int, **acceptance) -> QuantumScenario:
    return QuantumScenario.model_validate({
        "kind": "quantum",
        "seed": seed,
        "quantum": {"packet": _PACKET, **_COEFFS, **coupling, "dt": 0.01, "n_steps": n_steps},
        "acceptance": acceptance,
    })


def scenario_cases(seed: int, quick: bool) -> List[Tuple[str, object]]:
    scale = 10 if quick else 1
    cases = []
    for p0 in BORN_CASES:
        label = "born_" + "_".join(f"{p:g}" for p in p0)
        cases.append((label, _diffusion(p0, 100_000 // scale, seed, born_sigma=3.0,
                                        require_all_absorbed=True)))
    for x in HITTING_CASES:
        cases.append((f"hitting_time_{x:g}", _diffusion(
            (x, 1.0 - x), 10_000 // scale, seed, mean_hitting_time=x * (1.0 - x),
            mean_hitting_time_rel_tol=0.05)))
    for x0 in SPLIT_CASES:
        cases.append((f"fp_split_{x0:g}", FokkerPlanckScenario.model_validate({
            "kind": "fokker-planck",
            "seed": seed,
            "fokker_planck": {"x0": x0, "compare_trajectories": 100_000 // scale},
            "acceptance": {"split_tolerance": 1e-3, "mass_tolerance": 1e-9,
                           "decay_rate_rel_tol": 0.02, "cross_sigma": 3.0},
        })))
    cases.append(("pointer", _quantum(
        seed, {"lambda_z": {"kind": "linear", "value": 0.3, "slope": 0.2}}, 10_000,
        norm_drift=1e-8, pointer_tolerance=1e-8)))
    cases.append(("coupled_norm", _quantum(
        seed, {"lambda_x": {"kind": "gaussian", "value": 0.5, "width": 1.5}}, 10_000,
        norm_drift=1e-8)))
    for i, (lam, c1, c2) in enumerate(RABI_CASES):
        cases.append((f"rabi_{i}", QuantumScenario.model_validate({
            "kind": "quantum",
            "seed": seed,
            "quantum": {"packet": _PACKET, "c1": c1, "c2": c2,
                        "lambda_x": {"kind": "constant", "value": lam},
                        "dt": 0.01, "n_steps": 1000},
            "acceptance": {"rabi_tolerance": 1e-6, "norm_drift": 1e-8},
        })))
    cases.append(("bridge", BridgeScenario.model_validate({
        "kind": "bridge",
        "seed": seed,
        "bridge": {
            "quantum": {"packet": _PACKET, **_COEFFS,
                        "lambda_x": {"kind": "gaussian", "value": 0.5, "width": 1.5},
                        "dt": 0.01, "n_steps": 20_000, "record_every": 10},
            "n_trajectories": 10_000 // scale,
        },
        "acceptance": {"born_sigma": 3.0, "min_correlation_sigma": 3.0},
    })))
    return cases


def synthetic_series(a: float, seed: int, index: int, n_steps: int = 5000,
                     dt: float = 4e-6) -> NormSeries:
    """Two-channel path from (0.5, 0.5) under a constant coefficient a."""
    return simulate_path(new_norm_vector([0.5, 0.5]), CorrelationModel.constant(2, a), dt,
                         n_steps, trajectory_rng(seed, index))


def correlation_recovery_check(seed: int) -> ToleranceCheck:
    estimate = estimate_correlations(synthetic_series(0.8, seed, 0), window=1)
    return tolerance_check("synthetic_a12_recovery", estimate.a12, 0.8, 0.08)


def pooled_variance_checks(seed: int) -> List[ToleranceCheck]:
    """Weighted combination against increments drawn from the pooled mixture directly."""
    worked = float(combine_variances([0.25, 0.75], [[4e-4], [0.0]])[0])
    checks = [tolerance_check("combined_variance_worked_value", worked, 1e-4, 0.0)]

    weights = [0.25, 0.75]
    series = [synthetic_series(0.8, seed, 1), synthetic_series(0.2, seed, 2)]
    ensemble = Ensemble.from_series(weights, series)
    combined = combine_fluctuation_variance(ensemble, series[0].spacing)[0]

    increments = np.stack([np.diff(s.norms[:, 0]) for s in series])
    pick = trajectory_rng(seed, 3).choice(len(weights), size=increments.shape[1], p=weights)
    pooled = increments[pick, np.arange(increments.shape[1])] ** 2
    error = pooled.std(ddof=1) / math.sqrt(pooled.size)
    checks.append(tolerance_check("combined_variance_pooled", combined, float(pooled.mean()),
                                  4.0 * error))
    return checks


def determinism_check(seed: int, quick: bool) -> ToleranceCheck:
    """Same scenario at 1 and 8 workers must write byte-identical files."""
    scenario = _diffusion((0.2, 0.3, 0.5), 200 if quick else 2000, seed, born_sigma=4.0)
    contents = []
    with tempfile.TemporaryDirectory() as tmp:
        for workers in (1, 8):
            directory = Path(tmp) / f"workers_{workers}"
            summary, tables = execute(scenario, workers=workers)
            paths = write_outputs(summary, tables, directory, ["csv", "json-summary"])
            contents.append({p.name: p.read_bytes() for p in paths})
    mismatched = sum(contents[0].get(name) != data for name, data in contents[1].items())
    mismatched += len(set(contents[0]) ^ set(contents[1]))
    return tolerance_check("byte_identical_outputs", mismatched, 0, 0)


def run(seed: int = 0, quick: bool = False, workers: int = 1) -> RunResult:
    checks: List[ToleranceCheck] = []
    results: Dict[str, dict] = {}

    for label, scenario in scenario_cases(seed, quick):
        logger.info(f"Verify case {label}")
        summary, _ = execute(scenario, workers=workers)
        results[label] = summary.results
        checks.extend(check.model_copy(update={"name": f"{label}.{check.name}"})
                      for check in summary.checks)

    checks.append(correlation_recovery_check(seed))
    checks.extend(pooled_variance_checks(seed))
    checks.append(determinism_check(seed, quick))

    failed = [check.name for check in checks if not check.passed]
    logger.info(f"Verify finished: {len(checks) - len(failed)}/{len(checks)} checks passed")
    return RunResult(results=results, checks=checks)
