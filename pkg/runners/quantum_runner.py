import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from const import NORM_DRIFT_TOLERANCE
from fluctuations import estimate_correlations
from runners.common import RunResult, flag_check, tolerance_check
from scenario import build_coupling, build_grid, build_state, coefficients
from schemas import QuantumBlock, QuantumScenario
from track_pattern import CouplingSpec, GridSpec, QuantumRun, default_threshold, evolve, \
    rabi_norm, wkb_diagnostic

logger = logging.getLogger(__name__)


@dataclass
class BlockRun:
    grid: GridSpec
    spec: CouplingSpec
    run: QuantumRun


def evolve_block(block: QuantumBlock, drift_tolerance: float = NORM_DRIFT_TOLERANCE) -> BlockRun:
    """Build and integrate the two-channel state a quantum block describes."""
    grid = build_grid(block)
    spec = build_coupling(block)
    state = build_state(block, grid)
    logger.info(f"Evolving {block.n_steps} steps of dt={block.dt} on {grid.n_points} points")
    run = evolve(state, spec, grid, block.dt, block.n_steps, record_every=block.record_every,
                 keep_snapshots=block.snapshot_every is not None,
                 drift_tolerance=drift_tolerance)
    return BlockRun(grid, spec, run)


def rabi_reference(block: QuantumBlock, spec: CouplingSpec, times: np.ndarray) -> Optional[np.ndarray]:
    """Closed-form p_1(t) when only a uniform, constant lambda_x acts, else None."""
    lx = spec.lambda_x
    if not (lx.uniform and not lx.time_dependent and spec.lambda_y.is_zero
            and spec.lambda_z.is_zero):
        return None
    c1, c2 = coefficients(block)
    value = 0.0 if lx.kind == "zero" else lx.value
    return rabi_norm(value, c1, c2, block.grid.hbar, times)


def run(scenario: QuantumScenario, workers: int = 1) -> RunResult:
    block = scenario.quantum
    acceptance = scenario.acceptance
    drift_tolerance = acceptance.norm_drift or NORM_DRIFT_TOLERANCE
    block_run = evolve_block(block, drift_tolerance)
    grid, spec, quantum = block_run.grid, block_run.spec, block_run.run
    series = quantum.series

    initial_norms = series.norms[0]
    pointer_drift = float(np.abs(series.norms - initial_norms).max())
    norm_drift = float(np.abs(quantum.total_norm - quantum.total_norm[0]).max())

    final = quantum.final
    threshold = default_threshold(final, block.wkb_threshold_fraction)
    diagnostics = wkb_diagnostic(final, spec, grid, threshold)

    results = {
        "initial_norms": initial_norms.tolist(),
        "final_norms": series.norms[-1].tolist(),
        "max_norm_drift": norm_drift,
        "max_channel_drift": pointer_drift,
        "pointer_coupling": spec.is_pointer,
        "edge_amplitude": quantum.edge_amplitude,
        "edge_flagged": quantum.edge_flagged,
        "wkb_threshold": threshold,
        "wkb": [asdict(d) for d in diagnostics],
    }

    if block.correlation_window is not None:
        estimate = estimate_correlations(series, block.correlation_window)
        results["correlations"] = {
            "matrix": estimate.matrix.tolist(),
            "standard_errors": estimate.standard_errors.tolist(),
            "n_increments": estimate.n_increments,
            "window_dt": estimate.window_dt,
        }

    checks = []
    if acceptance.norm_drift is not None:
        checks.append(tolerance_check("norm_drift", norm_drift, 0.0, acceptance.norm_drift))
    if acceptance.pointer_tolerance is not None:
        checks.append(tolerance_check("pointer_channel_drift", pointer_drift, 0.0,
                                      acceptance.pointer_tolerance))
    if acceptance.rabi_tolerance is not None:
        reference = rabi_reference(block, spec, series.times)
        if reference is None:
            logger.warning("Rabi check requested but the coupling has no closed form")
            checks.append(flag_check("rabi_closed_form", False))
        else:
            error = float(np.abs(series.norms[:, 0] - reference).max())
            results["max_rabi_error"] = error
            checks.append(tolerance_check("rabi_closed_form", error, 0.0,
                                          acceptance.rabi_tolerance))

    tables = {"quantum_series.csv": quantum.series_frame()}
    if block.snapshot_every is not None:
        for i, snapshot in enumerate(quantum.snapshots[::block.snapshot_every]):
            frame = snapshot.snapshot_frame(grid)
            frame.insert(0, "t", snapshot.t)
            tables[f"quantum_snapshot_{i:04d}.csv"] = frame
    return RunResult(results=results, checks=checks, tables=tables)
