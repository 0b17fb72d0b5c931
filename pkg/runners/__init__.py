import logging
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple

import pandas as pd

from outputs import write_outputs
from runners import bridge_runner, diffusion_runner, fp_runner, mixture_runner, quantum_runner
from runners.common import RunResult
from schemas import RunSummary, Scenario

logger = logging.getLogger(__name__)

RUNNERS = {
    "diffusion": diffusion_runner.run,
    "fokker-planck": fp_runner.run,
    "quantum": quantum_runner.run,
    "mixture": mixture_runner.run,
    "bridge": bridge_runner.run,
}


def summarize(kind: str, seed: int, echo: dict, result: RunResult) -> RunSummary:
    summary = RunSummary.build(kind, seed, echo, result.results, result.checks)
    for check in summary.checks:
        if not check.passed:
            logger.warning(f"Check {check.name} failed: value={check.value}, "
                           f"expected={check.expected}, tolerance={check.tolerance}")
    return summary


def execute(scenario: Scenario, workers: int = 1) -> Tuple[RunSummary, Dict[str, pd.DataFrame]]:
    """Run a validated scenario without touching the filesystem."""
    logger.info(f"Running {scenario.kind} scenario with seed {scenario.seed}")
    result = RUNNERS[scenario.kind](scenario, workers=workers)
    summary = summarize(scenario.kind, scenario.seed, scenario.model_dump(mode="json"), result)
    return summary, result.tables


def run_scenario(scenario: Scenario, out_dir: Optional[Path] = None,
                 formats: Optional[Iterable[str]] = None, workers: int = 1) -> RunSummary:
    """Run a scenario and write its CSV tables and summary.

    out_dir and formats default to the scenario's output block.
    """
    summary, tables = execute(scenario, workers=workers)
    directory = Path(out_dir) if out_dir is not None else Path(scenario.output.directory)
    write_outputs(summary, tables, directory, formats or scenario.output.formats)
    return summary
