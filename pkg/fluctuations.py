from dataclasses import dataclass

import numpy as np

from errors import InvalidParameter, SeriesTooShort
from models import NormSeries


@dataclass(frozen=True)
class CorrelationEstimate:
    """Windowed estimate of the fluctuation coefficients.

    Off the diagonal: A_jk = -<dp_j dp_k>/dt. On the diagonal: <dp_j^2>/dt, the rate
    that the model predicts to be sum_k A_jk.
    """

    matrix: np.ndarray
    standard_errors: np.ndarray
    n_increments: int
    window_dt: float

    @property
    def a12(self) -> float:
        return float(self.matrix[0, 1])

    @property
    def a12_error(self) -> float:
        return float(self.standard_errors[0, 1])

    def increment_variances(self) -> np.ndarray:
        """<dp_j^2> per channel for the estimator's window."""
        return np.diag(self.matrix) * self.window_dt


def estimate_correlations(series: NormSeries, window: int) -> CorrelationEstimate:
    """Estimate A_jk from non-overlapping increments taken every `window` samples.

    Standard errors are delete-one jackknife errors over the increments.
    """
    if window < 1:
        raise InvalidParameter(f"Window must be at least 1 sample, got {window}")
    if len(series) < 10 * window:
        raise SeriesTooShort(
            f"Series has {len(series)} points; need at least {10 * window} for window {window}"
        )
    window_dt = series.spacing * window
    increments = np.diff(series.norms[::window], axis=0)
    m = increments.shape[0]

    products = increments[:, :, None] * increments[:, None, :]
    sign = np.where(np.eye(series.n_channels, dtype=bool), 1.0, -1.0)
    total = products.sum(axis=0)
    matrix = sign * total / m / window_dt

    leave_one_out = sign * (total[None, :, :] - products) / (m - 1) / window_dt
    spread = leave_one_out - leave_one_out.mean(axis=0)
    standard_errors = np.sqrt((m - 1) / m * (spread**2).sum(axis=0))

    return CorrelationEstimate(
        matrix=matrix,
        standard_errors=standard_errors,
        n_increments=m,
        window_dt=window_dt,
    )
