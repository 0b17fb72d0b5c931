"""Weighted ensemble of wave-function components (the reduced density matrix view).

Each component alpha carries a weight pi_alpha and the norm series its wave function
produces. Components fluctuate independently, so the combined increment variance is
the weighted sum of the component variances.
"""
import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from const import WEIGHT_TOLERANCE
from errors import InvalidParameter, MismatchedGrids
from fluctuations import estimate_correlations
from models import CorrelationModel, NormSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Component:
    weight: float
    series: NormSeries
    label: str = ""


@dataclass(frozen=True)
class Ensemble:
    components: Tuple[Component, ...]

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise InvalidParameter("An ensemble needs at least one component")
        weights = np.array([c.weight for c in components], dtype=np.float64)
        if np.any(~np.isfinite(weights)) or np.any(weights < 0.0):
            raise InvalidParameter(f"Weights must be finite and nonnegative, got {weights.tolist()}")
        if abs(weights.sum() - 1.0) > WEIGHT_TOLERANCE:
            raise InvalidParameter(f"Weights sum to {weights.sum()!r}, expected 1")
        reference = components[0].series
        for component in components[1:]:
            if not reference.same_grid(component.series):
                raise MismatchedGrids(
                    f"Component {component.label or '?'} does not share the channel count "
                    f"and time grid of the first component"
                )
        object.__setattr__(self, "components", components)

    @classmethod
    def from_series(cls, weights: Sequence[float], series: Sequence[NormSeries]) -> "Ensemble":
        if len(weights) != len(series):
            raise InvalidParameter("Need one weight per series")
        return cls(tuple(Component(float(w), s, f"component-{i}")
                         for i, (w, s) in enumerate(zip(weights, series))))

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @property
    def reference(self) -> NormSeries:
        return self.components[0].series


def combine_norms(ensemble: Ensemble) -> NormSeries:
    """p_j(t) = sum_alpha pi_alpha p_j,alpha(t)."""
    stacked = np.stack([c.series.norms for c in ensemble.components])
    combined = np.tensordot(ensemble.weights, stacked, axes=1)
    drift = np.abs(combined.sum(axis=1) - 1.0).max()
    if drift > 1e-9:
        logger.warning(f"Combined norms deviate from 1 by up to {drift:.3e}")
    return NormSeries(ensemble.reference.times.copy(), combined)


def window_for(series: NormSeries, dt: float) -> int:
    """Number of samples spanning dt; dt must be a whole multiple of the sample spacing."""
    spacing = series.spacing
    window = int(round(dt / spacing))
    if window < 1 or abs(window * spacing - dt) > 1e-9 * max(dt, spacing):
        raise InvalidParameter(
            f"dt={dt} is not a positive multiple of the sample spacing {spacing}"
        )
    return window


def component_variances(ensemble: Ensemble, dt: float) -> np.ndarray:
    """<dp_j,alpha^2> over increments of length dt, shape (components, channels)."""
    window = window_for(ensemble.reference, dt)
    return np.array([
        estimate_correlations(c.series, window).increment_variances()
        for c in ensemble.components
    ])


def combine_variances(weights: Sequence[float], variances: np.ndarray) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64)
    variances = np.asarray(variances, dtype=np.float64)
    return weights @ variances


def combine_fluctuation_variance(ensemble: Ensemble, dt: float) -> np.ndarray:
    """(Delta dp_j)^2 = sum_alpha pi_alpha (Delta dp_j,alpha)^2 for increments over dt."""
    return combine_variances(ensemble.weights, component_variances(ensemble, dt))


def combine_correlations(ensemble: Ensemble, dt: float) -> np.ndarray:
    """The same weighted sum applied to the whole A_jk matrix of each component."""
    window = window_for(ensemble.reference, dt)
    matrices = np.stack([estimate_correlations(c.series, window).matrix
                         for c in ensemble.components])
    return np.tensordot(ensemble.weights, matrices, axes=1)


def equivalent_model(ensemble: Ensemble, dt: float) -> CorrelationModel:
    """Constant single-component model with the ensemble's combined coefficients."""
    matrix = combine_correlations(ensemble, dt)
    base = 0.5 * (matrix + matrix.T)
    np.fill_diagonal(base, 0.0)
    negative = base < 0.0
    if negative.any():
        logger.warning(f"Clipping {int(negative.sum()) // 2} negative coefficient pair(s) to 0")
        base[negative] = 0.0
    return CorrelationModel("constant", base)
