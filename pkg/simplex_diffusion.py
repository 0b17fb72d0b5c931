"""Martingale diffusion of channel squared norms on the probability simplex.

Increments are sampled as pairwise exchanges: for each active pair (j, k) a draw
d ~ Normal(0, A_jk dt) moves d from channel k to channel j. The covariance of the
resulting increments is -A_jk dt off the diagonal and (sum_k A_jk) dt on it, and
the sum of the norms is untouched. A norm that would cross zero is truncated to
exactly zero and its channel is retired for good.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np
from numba import njit

from const import (
    DEFAULT_MAX_DEPTH,
    DEFAULT_THETA,
    NORMALS_CHUNK,
    SUM_TOLERANCE,
)
from errors import (
    InvalidParameter,
    NegativeEntry,
    NonFiniteIncrement,
    NotNormalized,
    TrajectoryTimeout,
)
from models import AbsorptionRecord, CorrelationModel, NormSeries, NormVector

logger = logging.getLogger(__name__)

ABSORBED = 0
TIMED_OUT = 1
REFILL = 2
NONFINITE = 3
PAUSED = 4
CONTINUE = -1


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for trajectory `index` of a run seeded with `seed`."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(sequence))


def new_norm_vector(values: Sequence[float]) -> NormVector:
    """Validate a list of squared norms. Channels that are exactly 0 start retired."""
    array = np.asarray(list(values), dtype=np.float64)
    if array.ndim != 1 or array.size == 0:
        raise InvalidParameter("A norm vector needs at least one channel")
    if not np.all(np.isfinite(array)):
        raise InvalidParameter("Norm vector entries must be finite")
    if np.any(array < 0.0):
        raise NegativeEntry(f"Negative squared norm in {array.tolist()}")
    total = float(array.sum())
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise NotNormalized(f"Squared norms sum to {total!r}, expected 1")
    if total != 1.0:
        array = array / total
    return NormVector(array, array > 0.0)


# -------------------------------------------------------------------
# Kernel
# -------------------------------------------------------------------

@njit(cache=True)
def _coefficient(kind, a, gain, ramp, pj, pk, t):
    if kind == 0:
        return a
    if kind == 1:
        return gain * a * pj * pk
    return a * min(1.0, t / ramp)


@njit(cache=True)
def _count_active(active):
    count = 0
    for flag in active:
        if flag:
            count += 1
    return count


@njit(cache=True)
def _needs_refinement(p, active, kind, base, gain, ramp, t, h, theta):
    n = p.size
    for j in range(n):
        if not active[j]:
            continue
        for k in range(j + 1, n):
            if not active[k]:
                continue
            a = _coefficient(kind, base[j, k], gain, ramp, p[j], p[k], t)
            if a > 0.0 and math.sqrt(a * h) > theta * min(p[j], p[k]):
                return True
    return False


@njit(cache=True)
def _exchange(p, active, kind, base, gain, ramp, t, h, normals, cursor,
              order_channel, order_time, n_zeroed):
    n = p.size
    start = p.copy()
    for j in range(n):
        for k in range(j + 1, n):
            if not (active[j] and active[k]):
                continue
            a = _coefficient(kind, base[j, k], gain, ramp, start[j], start[k], t)
            if not math.isfinite(a):
                return NONFINITE, cursor, n_zeroed
            if a <= 0.0:
                continue
            if cursor >= normals.size:
                return REFILL, cursor, n_zeroed
            delta = math.sqrt(a * h) * normals[cursor]
            cursor += 1
            if p[j] + delta <= 0.0:
                delta = -p[j]
            elif p[k] - delta <= 0.0:
                delta = p[k]
            p[j] += delta
            p[k] -= delta
            if p[j] == 0.0:
                active[j] = False
                order_channel[n_zeroed] = j
                order_time[n_zeroed] = t + h
                n_zeroed += 1
            elif p[k] == 0.0:
                active[k] = False
                order_channel[n_zeroed] = k
                order_time[n_zeroed] = t + h
                n_zeroed += 1
    return CONTINUE, cursor, n_zeroed


@njit(cache=True)
def _advance(p, active, t, kind, base, gain, ramp, dt, t_max, theta, max_depth,
             normals, cursor, order_channel, order_time, n_zeroed, max_steps):
    n = p.size
    ticks = 1 << max_depth
    steps = 0
    saved_p = p.copy()
    saved_active = active.copy()
    while True:
        if _count_active(active) <= 1:
            for j in range(n):
                if active[j]:
                    p[j] = 1.0
            return ABSORBED, t, steps, cursor, n_zeroed
        if t >= t_max:
            return TIMED_OUT, t, steps, cursor, n_zeroed
        if steps >= max_steps:
            return PAUSED, t, steps, cursor, n_zeroed

        saved_p[:] = p
        saved_active[:] = active
        saved_cursor = cursor
        saved_zeroed = n_zeroed
        t_start = t
        elapsed = 0
        while elapsed < ticks:
            level = 0
            while level < max_depth and _needs_refinement(
                p, active, kind, base, gain, ramp, t, dt / (1 << level), theta
            ):
                level += 1
            stride = ticks >> level
            while elapsed % stride != 0:
                stride >>= 1
            h = dt * stride / ticks
            status, cursor, n_zeroed = _exchange(
                p, active, kind, base, gain, ramp, t, h, normals, cursor,
                order_channel, order_time, n_zeroed,
            )
            if status == REFILL or status == NONFINITE:
                p[:] = saved_p
                active[:] = saved_active
                return status, t_start, steps, saved_cursor, saved_zeroed
            elapsed += stride
            t = t_start + dt * elapsed / ticks
            if _count_active(active) <= 1:
                break
        steps += 1


# -------------------------------------------------------------------
# Python driver
# -------------------------------------------------------------------

class _Stepper:
    """Mutable trajectory state plus the normals buffer feeding the kernel."""

    def __init__(self, state: NormVector, model: CorrelationModel, t: float, dt: float,
                 rng: np.random.Generator, theta: float, max_depth: int, chunk: int):
        if model.n_channels != state.n_channels:
            raise InvalidParameter(
                f"Model has {model.n_channels} channels, state has {state.n_channels}"
            )
        if not (np.isfinite(dt) and dt > 0.0):
            raise InvalidParameter(f"Time step must be positive, got {dt}")
        if not (0.0 < theta):
            raise InvalidParameter(f"Refinement threshold must be positive, got {theta}")
        if not (0 <= max_depth <= 40):
            raise InvalidParameter(f"Refinement depth must lie in [0, 40], got {max_depth}")
        self.p = np.array(state.values, dtype=np.float64)
        self.active = np.array(state.active, dtype=np.bool_)
        self.t = float(t)
        self.dt = float(dt)
        self.model = model
        self.base = np.array(model.base, dtype=np.float64)
        self.rng = rng
        self.theta = float(theta)
        self.max_depth = int(max_depth)
        self.chunk = int(chunk)
        self.steps = 0

        n = state.n_channels
        self.order_channel = np.full(n, -1, dtype=np.int64)
        self.order_time = np.zeros(n, dtype=np.float64)
        retired = np.flatnonzero(~self.active)
        self.order_channel[: retired.size] = retired
        self.order_time[: retired.size] = self.t
        self.n_zeroed = int(retired.size)

        self.normals = rng.standard_normal(self.chunk)
        self.cursor = 0

    def advance(self, max_steps: int, t_max: float) -> int:
        budget = max_steps
        while True:
            status, t, done, cursor, n_zeroed = _advance(
                self.p, self.active, self.t, self.model.code, self.base,
                float(self.model.gain), float(self.model.ramp), self.dt, float(t_max),
                self.theta, self.max_depth, self.normals, self.cursor,
                self.order_channel, self.order_time, self.n_zeroed, budget,
            )
            self.t = t
            self.steps += done
            budget -= done
            self.cursor = cursor
            self.n_zeroed = n_zeroed
            if status == REFILL:
                self.normals = np.concatenate(
                    (self.normals[self.cursor:], self.rng.standard_normal(self.chunk))
                )
                self.cursor = 0
                continue
            if status == NONFINITE:
                raise NonFiniteIncrement(
                    f"Correlation model evaluated to a non-finite value at t={self.t}"
                )
            return status

    def norm_vector(self) -> NormVector:
        return NormVector(self.p.copy(), self.active.copy())

    def absorption_order(self):
        return tuple(
            (int(self.order_channel[i]), float(self.order_time[i]))
            for i in range(self.n_zeroed)
        )


def step(state: NormVector, model: CorrelationModel, t: float, dt: float,
         rng: np.random.Generator, theta: float = DEFAULT_THETA,
         max_depth: int = DEFAULT_MAX_DEPTH) -> NormVector:
    """Advance the norms by one time step dt, sub-stepping near the boundary."""
    n_pairs = state.n_channels * (state.n_channels - 1) // 2
    stepper = _Stepper(state, model, t, dt, rng, theta, max_depth, chunk=max(4 * n_pairs, 1))
    stepper.advance(max_steps=1, t_max=math.inf)
    return stepper.norm_vector()


def run_trajectory(p0: NormVector, model: CorrelationModel, dt: float, t_max: float,
                   rng: np.random.Generator, *, trajectory_id: int = 0,
                   theta: float = DEFAULT_THETA, max_depth: int = DEFAULT_MAX_DEPTH,
                   strict: bool = False) -> AbsorptionRecord:
    """Step until a single channel survives or t_max is reached.

    A timed-out run comes back flagged with winner None; with strict=True it raises
    TrajectoryTimeout instead.
    """
    if not (np.isfinite(t_max) and t_max > 0.0):
        raise InvalidParameter(f"t_max must be positive and finite, got {t_max}")
    stepper = _Stepper(p0, model, 0.0, dt, rng, theta, max_depth, chunk=NORMALS_CHUNK)
    status = stepper.advance(max_steps=np.iinfo(np.int64).max, t_max=t_max)

    timed_out = status == TIMED_OUT
    winner: Optional[int] = None
    if not timed_out:
        winner = int(np.flatnonzero(stepper.active)[0])
    else:
        logger.warning(f"Trajectory {trajectory_id} not absorbed by t_max={t_max}")
        if strict:
            raise TrajectoryTimeout(f"Trajectory {trajectory_id} not absorbed by t_max={t_max}")

    return AbsorptionRecord(
        trajectory_id=trajectory_id,
        winner=winner,
        hitting_time=stepper.t,
        steps=stepper.steps,
        absorption_order=stepper.absorption_order(),
        final_values=tuple(float(v) for v in stepper.p),
        timed_out=timed_out,
    )


def simulate_path(p0: NormVector, model: CorrelationModel, dt: float, n_steps: int,
                  rng: np.random.Generator, theta: float = DEFAULT_THETA,
                  max_depth: int = DEFAULT_MAX_DEPTH) -> NormSeries:
    """Norm vector sampled after each of n_steps outer steps (n_steps + 1 rows)."""
    if n_steps < 1:
        raise InvalidParameter(f"n_steps must be at least 1, got {n_steps}")
    stepper = _Stepper(p0, model, 0.0, dt, rng, theta, max_depth, chunk=NORMALS_CHUNK)
    norms = np.empty((n_steps + 1, p0.n_channels), dtype=np.float64)
    norms[0] = stepper.p
    for i in range(1, n_steps + 1):
        stepper.advance(max_steps=1, t_max=math.inf)
        norms[i] = stepper.p
    return NormSeries(np.arange(n_steps + 1) * dt, norms)
