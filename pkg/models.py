from dataclasses import dataclass, field
from typing import Literal, Optional, Tuple

import numpy as np
import pandas as pd

from errors import InvalidParameter

ModelKind = Literal["constant", "bilinear", "time-ramp"]
KIND_CODES = {"constant": 0, "bilinear": 1, "time-ramp": 2}


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class NormVector:
    """Squared norms p_j of the channels, a point of the probability simplex.

    A channel whose `active` flag is False sits at exactly 0 and stays there.
    Build instances through `simplex_diffusion.new_norm_vector`, which validates them.
    """

    values: np.ndarray
    active: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=np.float64)))
        object.__setattr__(self, "active", _frozen(np.asarray(self.active, dtype=bool)))

    @property
    def n_channels(self) -> int:
        return int(self.values.size)

    @property
    def is_vertex(self) -> bool:
        return int(self.active.sum()) <= 1


@dataclass(frozen=True)
class CorrelationModel:
    """Coefficients A_jk(p, t) = -<dp_j dp_k>/dt of the squared-norm fluctuations.

    constant:  A_jk = a_jk
    bilinear:  A_jk = g * a_jk * p_j * p_k   (vanishes on the simplex boundary)
    time-ramp: A_jk = a_jk * min(1, t / ramp)
    """

    kind: ModelKind
    base: np.ndarray
    gain: float = 1.0
    ramp: float = 1.0

    def __post_init__(self):
        if self.kind not in KIND_CODES:
            raise InvalidParameter(f"Unknown correlation model kind: {self.kind}")
        base = np.asarray(self.base, dtype=np.float64)
        if base.ndim != 2 or base.shape[0] != base.shape[1]:
            raise InvalidParameter("Correlation matrix must be square")
        if not np.all(np.isfinite(base)):
            raise InvalidParameter("Correlation matrix must be finite")
        if not np.array_equal(base, base.T):
            raise InvalidParameter("Correlation matrix must be symmetric")
        if np.any(np.diag(base) != 0.0):
            raise InvalidParameter("Correlation matrix must have a zero diagonal")
        if np.any(base < 0.0):
            raise InvalidParameter("Correlation coefficients must be nonnegative")
        if self.kind == "bilinear" and not (np.isfinite(self.gain) and self.gain >= 0.0):
            raise InvalidParameter("Bilinear gain must be finite and nonnegative")
        if self.kind == "time-ramp" and not (np.isfinite(self.ramp) and self.ramp > 0.0):
            raise InvalidParameter("Ramp duration must be positive")
        object.__setattr__(self, "base", _frozen(base))

    @classmethod
    def constant(cls, n_channels: int, a: float) -> "CorrelationModel":
        return cls("constant", a * (1.0 - np.eye(n_channels)))

    @classmethod
    def bilinear(cls, n_channels: int, gain: float) -> "CorrelationModel":
        return cls("bilinear", 1.0 - np.eye(n_channels), gain=gain)

    @classmethod
    def time_ramp(cls, base: np.ndarray, ramp: float) -> "CorrelationModel":
        return cls("time-ramp", base, ramp=ramp)

    @property
    def n_channels(self) -> int:
        return int(self.base.shape[0])

    @property
    def code(self) -> int:
        return KIND_CODES[self.kind]

    def evaluate(self, p: np.ndarray, t: float) -> np.ndarray:
        if self.kind == "constant":
            return self.base.copy()
        if self.kind == "bilinear":
            p = np.asarray(p, dtype=np.float64)
            return self.gain * self.base * np.outer(p, p)
        return self.base * min(1.0, t / self.ramp)


@dataclass(frozen=True)
class AbsorptionRecord:
    trajectory_id: int
    winner: Optional[int]
    hitting_time: float
    steps: int
    absorption_order: Tuple[Tuple[int, float], ...]
    final_values: Tuple[float, ...]
    timed_out: bool = False

    def is_vertex(self) -> bool:
        if self.winner is None:
            return False
        return all(
            value == (1.0 if channel == self.winner else 0.0)
            for channel, value in enumerate(self.final_values)
        )


@dataclass(frozen=True)
class BornReport:
    n_trajectories: int
    initial: Tuple[float, ...]
    frequencies: Tuple[float, ...]
    standard_errors: Tuple[float, ...]
    mean_hitting_time: float
    hitting_time_stddev: float
    n_completed: int
    n_timeouts: int

    def deviations(self) -> np.ndarray:
        """|f_j - p_j(0)| in units of the binomial standard error (of p_j(0))."""
        p0 = np.asarray(self.initial)
        n = max(self.n_completed, 1)
        expected_se = np.sqrt(p0 * (1.0 - p0) / n)
        gap = np.abs(np.asarray(self.frequencies) - p0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(expected_se > 0, gap / np.where(expected_se > 0, expected_se, 1.0),
                            np.where(gap > 0, np.inf, 0.0))

    def within(self, n_sigma: float) -> bool:
        return bool(np.all(self.deviations() <= n_sigma))


@dataclass(frozen=True)
class NormSeries:
    """Channel squared norms sampled on a uniform time grid; norms has shape (T, N)."""

    times: np.ndarray
    norms: np.ndarray
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        norms = np.asarray(self.norms, dtype=np.float64)
        if norms.ndim != 2 or norms.shape[0] != times.size:
            raise InvalidParameter("Norm series must have one row of norms per time point")
        object.__setattr__(self, "times", _frozen(times))
        object.__setattr__(self, "norms", _frozen(norms))

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def n_channels(self) -> int:
        return int(self.norms.shape[1])

    @property
    def spacing(self) -> float:
        if self.times.size < 2:
            raise InvalidParameter("Norm series needs at least two time points")
        steps = np.diff(self.times)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise InvalidParameter("Norm series must be uniformly sampled")
        return float(steps[0])

    def restrict(self, start: int, stop: int) -> "NormSeries":
        return NormSeries(self.times[start:stop], self.norms[start:stop])

    def same_grid(self, other: "NormSeries") -> bool:
        return (
            self.n_channels == other.n_channels
            and self.times.shape == other.times.shape
            and np.allclose(self.times, other.times, rtol=1e-12, atol=1e-15)
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"t": self.times})
        for channel in range(self.n_channels):
            frame[f"p{channel + 1}"] = self.norms[:, channel]
        return frame
