import logging
import multiprocessing as mp
from functools import partial
from typing import List, Sequence

import numpy as np

from const import DEFAULT_MAX_DEPTH, DEFAULT_THETA
from errors import InvalidParameter
from models import AbsorptionRecord, BornReport, CorrelationModel, NormVector
from simplex_diffusion import run_trajectory, trajectory_rng

logger = logging.getLogger(__name__)


def _run_chunk(indices: Sequence[int], p0: NormVector, model: CorrelationModel, dt: float,
               t_max: float, seed: int, theta: float, max_depth: int) -> List[AbsorptionRecord]:
    logger.debug(f"Worker running trajectories {indices[0]}..{indices[-1]}")
    return [
        run_trajectory(p0, model, dt, t_max, trajectory_rng(seed, index),
                       trajectory_id=index, theta=theta, max_depth=max_depth)
        for index in indices
    ]


def _chunks(n: int, workers: int) -> List[List[int]]:
    # several chunks per worker so that slow trajectories do not leave workers idle
    n_chunks = min(n, workers * 8)
    bounds = np.linspace(0, n, n_chunks + 1).astype(int)
    return [list(range(lo, hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def simulate_ensemble(p0: NormVector, model: CorrelationModel, n: int, dt: float,
                      t_max: float, seed: int, workers: int = 1,
                      theta: float = DEFAULT_THETA,
                      max_depth: int = DEFAULT_MAX_DEPTH) -> List[AbsorptionRecord]:
    """Run n independent trajectories and return their records ordered by trajectory id.

    Trajectory i always draws from the stream keyed by (seed, i), so the records do
    not depend on the number of workers.
    """
    if n < 1:
        raise InvalidParameter(f"Ensemble size must be at least 1, got {n}")
    if workers < 1:
        raise InvalidParameter(f"Worker count must be at least 1, got {workers}")

    logger.info(f"Running {n} trajectories on {workers} worker(s), seed={seed}")
    task = partial(_run_chunk, p0=p0, model=model, dt=dt, t_max=t_max, seed=seed,
                   theta=theta, max_depth=max_depth)
    chunks = _chunks(n, workers)
    if workers == 1 or len(chunks) == 1:
        batches = [task(chunk) for chunk in chunks]
    else:
        with mp.get_context("spawn").Pool(processes=workers) as pool:
            batches = pool.map(task, chunks)

    records = sorted((record for batch in batches for record in batch),
                     key=lambda record: record.trajectory_id)
    return records


def summarize_records(p0: NormVector, records: Sequence[AbsorptionRecord]) -> BornReport:
    """Winner frequencies and hitting-time statistics over the completed trajectories."""
    ordered = sorted(records, key=lambda record: record.trajectory_id)
    completed = [record for record in ordered if not record.timed_out]
    n_timeouts = len(ordered) - len(completed)
    if n_timeouts:
        logger.warning(f"{n_timeouts} of {len(ordered)} trajectories timed out")

    n_channels = p0.n_channels
    n_completed = len(completed)
    if n_completed:
        winners = np.array([record.winner for record in completed], dtype=np.int64)
        counts = np.bincount(winners, minlength=n_channels)
        frequencies = counts / n_completed
        times = np.array([record.hitting_time for record in completed])
        mean_time = float(times.mean())
        std_time = float(times.std(ddof=1)) if n_completed > 1 else 0.0
    else:
        frequencies = np.zeros(n_channels)
        mean_time = float("nan")
        std_time = float("nan")
    standard_errors = np.sqrt(frequencies * (1.0 - frequencies) / max(n_completed, 1))

    return BornReport(
        n_trajectories=len(ordered),
        initial=tuple(float(v) for v in p0.values),
        frequencies=tuple(float(f) for f in frequencies),
        standard_errors=tuple(float(s) for s in standard_errors),
        mean_hitting_time=mean_time,
        hitting_time_stddev=std_time,
        n_completed=n_completed,
        n_timeouts=n_timeouts,
    )


def run_ensemble(p0: NormVector, model: CorrelationModel, n: int, dt: float, t_max: float,
                 seed: int, workers: int = 1, theta: float = DEFAULT_THETA,
                 max_depth: int = DEFAULT_MAX_DEPTH) -> BornReport:
    records = simulate_ensemble(p0, model, n, dt, t_max, seed, workers=workers,
                                theta=theta, max_depth=max_depth)
    report = summarize_records(p0, records)
    logger.info(f"Ensemble finished: frequencies={report.frequencies}, "
                f"mean hitting time={report.mean_hitting_time:.6g}")
    return report
