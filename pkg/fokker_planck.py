"""Fokker-Planck equation for N = 2 squared norms, x = p_1, on the unit interval.

The density obeys dP/dt = D d2P/dx2 with D = A/2 and absorbing ends. The grid is
cell-centered with antisymmetric ghost cells, so the density vanishes on both end
faces and sin(pi x) sampled at the centers is an exact eigenvector of the discrete
generator. Mass leaving through a face is accumulated as absorbed mass with the
same flux the time scheme used, which keeps interior + absorbed = 1 to roundoff.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import factorized

from const import DEFAULT_CELLS, MIN_CELLS, POSITIVITY_NOISE
from errors import InsufficientDecay, InvalidParameter, UnstableStep

logger = logging.getLogger(__name__)

Scheme = Literal["implicit", "explicit"]


@dataclass(frozen=True)
class FpGrid:
    n_cells: int
    diffusion_coefficient: float
    x_centers: np.ndarray = field(init=False, repr=False)
    dx: float = field(init=False)

    def __post_init__(self):
        if self.n_cells < MIN_CELLS:
            raise InvalidParameter(f"Need at least {MIN_CELLS} cells, got {self.n_cells}")
        if not (np.isfinite(self.diffusion_coefficient) and self.diffusion_coefficient > 0.0):
            raise InvalidParameter(
                f"Diffusion coefficient must be positive, got {self.diffusion_coefficient}"
            )
        dx = 1.0 / self.n_cells
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "x_centers", (np.arange(self.n_cells) + 0.5) * dx)

    @classmethod
    def from_correlation(cls, a: float, n_cells: int = DEFAULT_CELLS) -> "FpGrid":
        """Grid for the process with Var(dp_1) = a dt, i.e. D = a / 2."""
        return cls(n_cells=n_cells, diffusion_coefficient=a / 2.0)

    def boundary_rate(self) -> float:
        """Outflow per unit of edge-cell density through an end face."""
        return 2.0 * self.diffusion_coefficient / self.dx

    def cell_of(self, x0: float) -> int:
        return min(int(x0 / self.dx), self.n_cells - 1)


@dataclass(frozen=True)
class FpSolution:
    x_centers: np.ndarray
    dx: float
    diffusion_coefficient: float
    x0: float
    scheme: str
    times: np.ndarray
    interior_mass: np.ndarray
    absorbed_series: np.ndarray  # (T, 2): mass absorbed at x = 0 and at x = 1
    snapshot_times: np.ndarray
    density_history: np.ndarray  # (S, n_cells)

    @property
    def absorbed_mass_0(self) -> float:
        return float(self.absorbed_series[-1, 0])

    @property
    def absorbed_mass_1(self) -> float:
        return float(self.absorbed_series[-1, 1])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def total_mass(self) -> np.ndarray:
        return self.interior_mass + self.absorbed_series.sum(axis=1)

    def density_frame(self) -> pd.DataFrame:
        n_snapshots, n_cells = self.density_history.shape
        return pd.DataFrame({
            "t": np.repeat(self.snapshot_times, n_cells),
            "x": np.tile(self.x_centers, n_snapshots),
            "density": self.density_history.ravel(),
        })

    def mass_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "mass0": self.absorbed_series[:, 0],
            "mass1": self.absorbed_series[:, 1],
        })


def build_generator(grid: FpGrid) -> sparse.csr_matrix:
    """D d2/dx2 with zero density on both end faces (ghost value = minus edge value)."""
    n = grid.n_cells
    scale = grid.diffusion_coefficient / grid.dx**2
    main = np.full(n, -2.0)
    main[0] = main[-1] = -3.0
    off = np.ones(n - 1)
    return (scale * sparse.diags([off, main, off], [-1, 0, 1], format="csr")).tocsr()


def smallest_eigenvalue(grid: FpGrid) -> float:
    """Smallest eigenvalue of -generator; its inverse is the slowest decay time."""
    n = grid.n_cells
    scale = grid.diffusion_coefficient / grid.dx**2
    main = np.full(n, 2.0 * scale)
    main[0] = main[-1] = 3.0 * scale
    off = np.full(n - 1, -scale)
    values = eigh_tridiagonal(main, off, eigvals_only=True, select="i", select_range=(0, 0))
    return float(values[0])


def stable_explicit_dt(grid: FpGrid) -> float:
    """Largest forward-Euler step keeping every update coefficient nonnegative.

    The edge rows carry -3 D / dx^2 on the diagonal, so dt <= dx^2 / (3 D) is the
    positivity bound; it also keeps 1 - 4 D dt / dx^2 above -1 for the highest mode.
    """
    return grid.dx**2 / (3.0 * grid.diffusion_coefficient)


def _clamp(density: np.ndarray, t: float) -> None:
    low = density.min()
    if low >= 0.0:
        return
    if low < -POSITIVITY_NOISE:
        logger.warning(f"Density reached {low:.3e} at t={t:.6g}; clamped to zero")
    else:
        logger.debug(f"Clamped roundoff {low:.3e} at t={t:.6g}")
    np.maximum(density, 0.0, out=density)


def solve(grid: FpGrid, x0: float, t_end: float, dt: float, scheme: Scheme = "implicit",
          n_snapshots: int = 50) -> FpSolution:
    """Evolve a unit mass started in the cell containing x0 up to t_end.

    x0 is snapped to the center of its cell. The implicit scheme (backward Euler) is
    unconditionally stable; the explicit one requires dt <= dx^2 / (3 D).
    """
    if not (0.0 < x0 < 1.0):
        raise InvalidParameter(f"x0 must lie strictly inside (0, 1), got {x0}")
    if not (np.isfinite(t_end) and t_end > 0.0):
        raise InvalidParameter(f"t_end must be positive, got {t_end}")
    if not (np.isfinite(dt) and dt > 0.0):
        raise InvalidParameter(f"dt must be positive, got {dt}")
    if scheme not in ("implicit", "explicit"):
        raise InvalidParameter(f"Unknown scheme: {scheme}")
    if scheme == "explicit" and dt > stable_explicit_dt(grid):
        raise UnstableStep(
            f"dt={dt} exceeds the explicit stability bound {stable_explicit_dt(grid):.3e}"
        )

    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    record_every = max(1, n_steps // max(n_snapshots, 1))
    generator = build_generator(grid)
    identity = sparse.identity(grid.n_cells, format="csc")
    rate = grid.boundary_rate()

    density = np.zeros(grid.n_cells)
    cell = grid.cell_of(x0)
    density[cell] = 1.0 / grid.dx
    x0_snapped = float(grid.x_centers[cell])

    if scheme == "implicit":
        solve_step = factorized((identity - dt * generator).tocsc())

    times = np.arange(n_steps + 1) * dt
    interior = np.empty(n_steps + 1)
    absorbed = np.zeros((n_steps + 1, 2))
    interior[0] = density.sum() * grid.dx
    snapshot_times = [0.0]
    snapshots = [density.copy()]

    for n in range(1, n_steps + 1):
        if scheme == "implicit":
            density = solve_step(density)
            outflow = dt * rate * np.array([density[0], density[-1]])
        else:
            outflow = dt * rate * np.array([density[0], density[-1]])
            density = density + dt * (generator @ density)
        _clamp(density, times[n])
        absorbed[n] = absorbed[n - 1] + outflow
        interior[n] = density.sum() * grid.dx
        if n % record_every == 0 or n == n_steps:
            snapshot_times.append(float(times[n]))
            snapshots.append(density.copy())

    logger.info(
        f"Fokker-Planck solve finished: x0={x0_snapped:.6g}, t_end={times[-1]:.6g}, "
        f"absorbed=({absorbed[-1, 0]:.6f}, {absorbed[-1, 1]:.6f})"
    )
    return FpSolution(
        x_centers=grid.x_centers.copy(),
        dx=grid.dx,
        diffusion_coefficient=grid.diffusion_coefficient,
        x0=x0_snapped,
        scheme=scheme,
        times=times,
        interior_mass=interior,
        absorbed_series=absorbed,
        snapshot_times=np.asarray(snapshot_times),
        density_history=np.vstack(snapshots),
    )


def survival_decay_rate(solution: FpSolution) -> float:
    """Least-squares decay rate of log(interior mass) over the last third of the run."""
    if solution.interior_mass[-1] >= 0.1:
        raise InsufficientDecay(
            f"Interior mass is still {solution.interior_mass[-1]:.3g} at t_end; need < 0.1"
        )
    t0, t1 = solution.times[0], solution.times[-1]
    window = (solution.times >= t0 + 2.0 * (t1 - t0) / 3.0) & (solution.interior_mass > 1e-250)
    if window.sum() < 2:
        raise InsufficientDecay("Too few usable points in the last third of the run")
    slope, _ = np.polyfit(solution.times[window], np.log(solution.interior_mass[window]), 1)
    return float(-slope)


def mean_absorption_time(solution: FpSolution, decay_rate: Optional[float] = None) -> float:
    """Mean first-passage time as the time integral of the surviving mass.

    The Riemann sum matches the scheme (right sum for backward Euler, left sum for
    forward Euler) so that it equals the discrete mean time exactly; the mass still
    inside at t_end is added as an exponential tail.
    """
    dt = solution.dt
    if solution.scheme == "implicit":
        integral = dt * solution.interior_mass[1:].sum()
    else:
        integral = dt * solution.interior_mass[:-1].sum()
    remaining = solution.interior_mass[-1]
    if remaining > 0.0:
        rate = decay_rate if decay_rate is not None else survival_decay_rate(solution)
        integral += remaining / rate
    return float(integral)
