"""Two track channels coupled to one collective coordinate x.

H = P^2/2M + V(x) + lambda(x, t) . sigma acting on (phi_1, phi_2). The integrator is a
Strang split: half a step of V + lambda.sigma (an exact 2x2 exponential per grid point),
a full kinetic step in Fourier space, and the second potential half. Every factor is
unitary, so the total norm is conserved to roundoff.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Literal, Tuple

import numpy as np
import pandas as pd

from const import (
    DEFAULT_HBAR,
    DEFAULT_MASS,
    EDGE_AMPLITUDE_LIMIT,
    MIN_GRID_POINTS,
    NORM_DRIFT_TOLERANCE,
    SUM_TOLERANCE,
)
from errors import (
    EmptyMask,
    InvalidParameter,
    NormDriftExceeded,
    UnnormalizedCoefficients,
    UnresolvablePacket,
)
from models import NormSeries

logger = logging.getLogger(__name__)

FieldKind = Literal["zero", "constant", "linear", "gaussian", "ramp"]
PotentialKind = Literal["free", "harmonic"]


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n_points: int
    mass: float = DEFAULT_MASS
    hbar: float = DEFAULT_HBAR

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise InvalidParameter(f"x_max must exceed x_min, got [{self.x_min}, {self.x_max}]")
        n = self.n_points
        if n < MIN_GRID_POINTS or n & (n - 1):
            raise InvalidParameter(
                f"n_points must be a power of two >= {MIN_GRID_POINTS}, got {n}"
            )
        if not self.mass > 0.0:
            raise InvalidParameter(f"Mass must be positive, got {self.mass}")
        if not self.hbar > 0.0:
            raise InvalidParameter(f"hbar must be positive, got {self.hbar}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    def norm(self, phi: np.ndarray) -> float:
        return float(np.sum(np.abs(phi) ** 2) * self.dx)


@dataclass(frozen=True)
class FieldForm:
    """A coupling component lambda_a(x, t).

    constant: value; linear: value + slope*x; gaussian: value*exp(-(x-center)^2 / 2 width^2);
    ramp: value*min(1, t/ramp), uniform in x.
    """

    kind: FieldKind = "zero"
    value: float = 0.0
    slope: float = 0.0
    center: float = 0.0
    width: float = 1.0
    ramp: float = 1.0

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "linear", "gaussian", "ramp"):
            raise InvalidParameter(f"Unknown field form: {self.kind}")
        if self.kind == "gaussian" and not self.width > 0.0:
            raise InvalidParameter("Gaussian coupling width must be positive")
        if self.kind == "ramp" and not self.ramp > 0.0:
            raise InvalidParameter("Ramp duration must be positive")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.value == 0.0 and self.slope == 0.0)

    @property
    def time_dependent(self) -> bool:
        return self.kind == "ramp"

    @property
    def uniform(self) -> bool:
        return self.kind in ("zero", "constant", "ramp") or (
            self.kind == "linear" and self.slope == 0.0
        )

    def evaluate(self, x: np.ndarray, t: float) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return np.full_like(x, self.value)
        if self.kind == "linear":
            return self.value + self.slope * x
        if self.kind == "gaussian":
            return self.value * np.exp(-((x - self.center) ** 2) / (2.0 * self.width**2))
        return np.full_like(x, self.value * min(1.0, t / self.ramp))


@dataclass(frozen=True)
class Potential:
    kind: PotentialKind = "harmonic"
    omega: float = 1.0

    def evaluate(self, x: np.ndarray, mass: float) -> np.ndarray:
        if self.kind == "free":
            return np.zeros_like(x)
        if self.kind == "harmonic":
            return 0.5 * mass * self.omega**2 * x**2
        raise InvalidParameter(f"Unknown potential: {self.kind}")


@dataclass(frozen=True)
class CouplingSpec:
    potential: Potential = field(default_factory=Potential)
    lambda_x: FieldForm = field(default_factory=FieldForm)
    lambda_y: FieldForm = field(default_factory=FieldForm)
    lambda_z: FieldForm = field(default_factory=FieldForm)

    @property
    def is_pointer(self) -> bool:
        """Diagonal coupling: only lambda_z acts."""
        return self.lambda_x.is_zero and self.lambda_y.is_zero

    @property
    def time_dependent(self) -> bool:
        return any(f.time_dependent for f in (self.lambda_x, self.lambda_y, self.lambda_z))

    def fields(self, x: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        values = tuple(f.evaluate(x, t) for f in (self.lambda_x, self.lambda_y, self.lambda_z))
        if not all(np.all(np.isfinite(v)) for v in values):
            raise InvalidParameter(f"Coupling field is not finite on the grid at t={t}")
        return values


@dataclass(frozen=True)
class GaussianPacket:
    center: float = 0.0
    width: float = 1.0
    momentum: float = 0.0


@dataclass
class TwoChannelState:
    phi1: np.ndarray
    phi2: np.ndarray
    t: float = 0.0

    def norms(self, grid: GridSpec) -> Tuple[float, float]:
        return grid.norm(self.phi1), grid.norm(self.phi2)

    def total_norm(self, grid: GridSpec) -> float:
        p1, p2 = self.norms(grid)
        return p1 + p2

    def copy(self) -> "TwoChannelState":
        return TwoChannelState(self.phi1.copy(), self.phi2.copy(), self.t)

    def snapshot_frame(self, grid: GridSpec) -> pd.DataFrame:
        return pd.DataFrame({
            "x": grid.x,
            "re_phi1": self.phi1.real,
            "im_phi1": self.phi1.imag,
            "re_phi2": self.phi2.real,
            "im_phi2": self.phi2.imag,
        })


def init_state(c1: complex, c2: complex, packet: GaussianPacket, grid: GridSpec) -> TwoChannelState:
    """phi_j = c_j phi with phi a normalized Gaussian packet (width = position spread)."""
    weight = abs(c1) ** 2 + abs(c2) ** 2
    if abs(weight - 1.0) > SUM_TOLERANCE:
        raise UnnormalizedCoefficients(f"|c1|^2 + |c2|^2 = {weight!r}, expected 1")
    if packet.width < 4.0 * grid.dx:
        raise UnresolvablePacket(
            f"Packet width {packet.width} is below 4 grid spacings ({4.0 * grid.dx:.3g})"
        )
    x = grid.x
    phi = np.exp(-((x - packet.center) ** 2) / (4.0 * packet.width**2)
                 + 1j * packet.momentum * x / grid.hbar)
    phi = phi / np.sqrt(grid.norm(phi))
    return TwoChannelState(complex(c1) * phi, complex(c2) * phi, 0.0)


class SplitOperator:
    """One Strang step of length dt (dt may be negative for backward evolution)."""

    def __init__(self, grid: GridSpec, spec: CouplingSpec, dt: float):
        if not (np.isfinite(dt) and dt != 0.0):
            raise InvalidParameter(f"Time step must be finite and nonzero, got {dt}")
        self.grid = grid
        self.spec = spec
        self.dt = dt
        self.x = grid.x
        self._tau = dt / (2.0 * grid.hbar)
        self._phase = np.exp(-1j * spec.potential.evaluate(self.x, grid.mass) * self._tau)
        self._kinetic = np.exp(-1j * grid.hbar * grid.k**2 * dt / (2.0 * grid.mass))
        self._static = None
        if not spec.time_dependent:
            self._static = self._half_factors(0.0)

    def _half_factors(self, t: float):
        lx, ly, lz = self.spec.fields(self.x, t)
        magnitude = np.sqrt(lx**2 + ly**2 + lz**2)
        cos = np.cos(magnitude * self._tau)
        # sin(|lambda| tau) / |lambda|, finite at |lambda| = 0
        sin_over = self._tau * np.sinc(magnitude * self._tau / np.pi)
        return cos, -1j * sin_over * lz, -1j * sin_over * (lx - 1j * ly), -1j * sin_over * (lx + 1j * ly)

    def _half_potential(self, phi1, phi2, factors):
        cos, diag, up, down = factors
        new1 = self._phase * (cos * phi1 + diag * phi1 + up * phi2)
        new2 = self._phase * (cos * phi2 - diag * phi2 + down * phi1)
        return new1, new2

    def __call__(self, state: TwoChannelState) -> TwoChannelState:
        factors = self._static if self._static is not None else self._half_factors(
            state.t + 0.5 * self.dt
        )
        phi1, phi2 = self._half_potential(state.phi1, state.phi2, factors)
        phi1 = np.fft.ifft(np.fft.fft(phi1) * self._kinetic)
        phi2 = np.fft.ifft(np.fft.fft(phi2) * self._kinetic)
        phi1, phi2 = self._half_potential(phi1, phi2, factors)
        return TwoChannelState(phi1, phi2, state.t + self.dt)


@dataclass
class QuantumRun:
    series: NormSeries
    total_norm: np.ndarray
    snapshots: List[TwoChannelState]
    final: TwoChannelState
    edge_amplitude: float
    edge_flagged: bool

    def series_frame(self) -> pd.DataFrame:
        frame = self.series.to_frame()
        frame["total_norm"] = self.total_norm
        return frame


def _edge_amplitude(state: TwoChannelState) -> float:
    return float(max(np.abs(state.phi1[[0, -1]]).max(), np.abs(state.phi2[[0, -1]]).max()))


def evolve(state: TwoChannelState, spec: CouplingSpec, grid: GridSpec, dt: float,
           n_steps: int, record_every: int = 1, keep_snapshots: bool = False,
           drift_tolerance: float = NORM_DRIFT_TOLERANCE) -> QuantumRun:
    """Integrate n_steps Strang steps, recording channel norms every record_every steps."""
    if n_steps < 1 or record_every < 1:
        raise InvalidParameter("n_steps and record_every must be at least 1")
    propagator = SplitOperator(grid, spec, dt)
    initial_total = state.total_norm(grid)

    times, norms, totals, snapshots = [], [], [], []
    edge = _edge_amplitude(state)

    def record(current: TwoChannelState) -> None:
        p1, p2 = current.norms(grid)
        total = p1 + p2
        if abs(total - initial_total) > drift_tolerance:
            logger.error(f"Norm drift {total - initial_total:.3e} at t={current.t:.6g}")
            raise NormDriftExceeded(
                f"Total norm moved from {initial_total!r} to {total!r} at t={current.t:.6g}"
            )
        times.append(current.t)
        norms.append((p1, p2))
        totals.append(total)
        if keep_snapshots:
            snapshots.append(current.copy())

    record(state)
    current = state
    for n in range(1, n_steps + 1):
        current = propagator(current)
        edge = max(edge, _edge_amplitude(current))
        if n % record_every == 0:
            record(current)

    flagged = edge > EDGE_AMPLITUDE_LIMIT
    if flagged:
        logger.warning(f"Wavefunction reached amplitude {edge:.3e} at the grid edge; "
                       f"widen [x_min, x_max]")
    return QuantumRun(
        series=NormSeries(np.asarray(times), np.asarray(norms)),
        total_norm=np.asarray(totals),
        snapshots=snapshots,
        final=current,
        edge_amplitude=edge,
        edge_flagged=flagged,
    )


# -------------------------------------------------------------------
# Amplitude/phase decomposition
# -------------------------------------------------------------------

@dataclass(frozen=True)
class WkbView:
    amplitude: np.ndarray
    phase: np.ndarray  # action units; NaN outside the mask
    mask: np.ndarray

    def reconstruct(self, hbar: float) -> np.ndarray:
        out = np.zeros(self.amplitude.shape, dtype=complex)
        out[self.mask] = self.amplitude[self.mask] * np.exp(1j * self.phase[self.mask] / hbar)
        return out


def _segments(mask: np.ndarray) -> List[Tuple[int, int]]:
    edges = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    return list(zip(starts, stops))


def wkb_decompose(phi: np.ndarray, grid: GridSpec, amplitude_threshold: float) -> WkbView:
    """Split phi into amplitude and phase; the phase is unwrapped per connected masked run."""
    amplitude = np.abs(phi)
    mask = amplitude > amplitude_threshold
    phase = np.full(phi.shape, np.nan)
    for start, stop in _segments(mask):
        phase[start:stop] = grid.hbar * np.unwrap(np.angle(phi[start:stop]))
    return WkbView(amplitude, phase, mask)


def _segment_gradient(values: np.ndarray, mask: np.ndarray, dx: float) -> np.ndarray:
    gradient = np.zeros(values.shape)
    for start, stop in _segments(mask):
        if stop - start >= 2:
            gradient[start:stop] = np.gradient(values[start:stop], dx)
    return gradient


@dataclass(frozen=True)
class ChannelDiagnostic:
    channel: int
    masked_points: int
    source_norm: float        # |sum_k!=j (lambda.sigma)_jk exp(i(S_k - S_j)/hbar) A_k|
    amplitude_source_norm: float  # its imaginary part over hbar, the amplitude equation source
    transport_norm: float     # |dA_j/dt + grad A_j . grad S_j / M| under the uncoupled H0
    phase_ratio: float
    amplitude_ratio: float


def _ratio(numerator: float, denominator: float) -> float:
    if numerator == 0.0:
        return 0.0
    if denominator == 0.0:
        return float("inf")
    return numerator / denominator


def wkb_diagnostic(state: TwoChannelState, spec: CouplingSpec, grid: GridSpec,
                   amplitude_threshold: float) -> List[ChannelDiagnostic]:
    """Per-channel size of the oscillating off-diagonal source relative to classical transport.

    A large amplitude_ratio means the coupling, not classical transport, drives the
    channel amplitude: classicality of the collective coordinate is broken.
    """
    if not (np.isfinite(amplitude_threshold) and amplitude_threshold > 0.0):
        raise InvalidParameter(f"Amplitude threshold must be positive, got {amplitude_threshold}")
    views = [wkb_decompose(phi, grid, amplitude_threshold) for phi in (state.phi1, state.phi2)]
    if not any(view.mask.any() for view in views):
        peak = max(np.abs(state.phi1).max(), np.abs(state.phi2).max())
        raise EmptyMask(
            f"No grid point exceeds amplitude {amplitude_threshold} (peak {peak:.3g})"
        )

    lx, ly, lz = spec.fields(grid.x, state.t)
    off_diagonal = {0: lx - 1j * ly, 1: lx + 1j * ly}
    phis = (state.phi1, state.phi2)
    kinetic = grid.hbar**2 * grid.k**2 / (2.0 * grid.mass)
    potential = spec.potential.evaluate(grid.x, grid.mass)

    results = []
    for j, view in enumerate(views):
        mask = view.mask
        if not mask.any():
            results.append(ChannelDiagnostic(j, 0, 0.0, 0.0, 0.0, float("nan"), float("nan")))
            continue
        phi_j, phi_k = phis[j], phis[1 - j]
        amp = view.amplitude[mask]

        # exp(i(S_k - S_j)/hbar) A_k = phi_k exp(-i S_j/hbar) = phi_k conj(phi_j) / A_j
        source = off_diagonal[j][mask] * phi_k[mask] * np.conj(phi_j[mask]) / amp

        h0_phi = np.fft.ifft(kinetic * np.fft.fft(phi_j)) + potential * phi_j
        d_amp_dt = np.real(np.conj(phi_j[mask]) * (-1j / grid.hbar) * h0_phi[mask]) / amp
        grad_amp = np.gradient(view.amplitude, grid.dx)[mask]
        grad_phase = _segment_gradient(view.phase, mask, grid.dx)[mask]
        transport = d_amp_dt + grad_amp * grad_phase / grid.mass

        def l2(values):
            return float(np.sqrt(np.sum(np.abs(values) ** 2) * grid.dx))

        source_norm = l2(source)
        amplitude_source_norm = l2(source.imag) / grid.hbar
        transport_norm = l2(transport)
        results.append(ChannelDiagnostic(
            channel=j,
            masked_points=int(mask.sum()),
            source_norm=source_norm,
            amplitude_source_norm=amplitude_source_norm,
            transport_norm=transport_norm,
            phase_ratio=_ratio(source_norm, transport_norm),
            amplitude_ratio=_ratio(amplitude_source_norm, transport_norm),
        ))
    return results


def default_threshold(state: TwoChannelState, fraction: float) -> float:
    peak = max(np.abs(state.phi1).max(), np.abs(state.phi2).max())
    return fraction * peak


def rabi_norm(lambda_x: float, c1: complex, c2: complex, hbar: float,
              t: np.ndarray) -> np.ndarray:
    """Closed-form p_1(t) under a uniform, constant lambda_x with no other coupling.

    phi_1(t) = c1 cos(w t) - i c2 sin(w t) with w = lambda_x / hbar.
    """
    angle = lambda_x * np.asarray(t, dtype=np.float64) / hbar
    return (abs(c1) ** 2 * np.cos(angle) ** 2 + abs(c2) ** 2 * np.sin(angle) ** 2
            + np.sin(2.0 * angle) * (np.conj(c1) * c2).imag)

