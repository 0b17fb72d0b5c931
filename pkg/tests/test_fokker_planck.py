import math

import numpy as np
import pytest

from errors import InsufficientDecay, InvalidParameter, UnstableStep
from fokker_planck import (
    FpGrid,
    build_generator,
    mean_absorption_time,
    smallest_eigenvalue,
    solve,
    stable_explicit_dt,
    survival_decay_rate,
)


@pytest.fixture(scope="module")
def solution_03():
    return solve(FpGrid.from_correlation(1.0), 0.3, t_end=5.0, dt=1e-3)


@pytest.fixture(scope="module")
def solution_05():
    return solve(FpGrid.from_correlation(1.0), 0.5, t_end=3.0, dt=1e-3)


class TestGrid:
    def test_cell_centers(self):
        grid = FpGrid(n_cells=20, diffusion_coefficient=0.5)
        assert grid.dx == pytest.approx(0.05)
        assert grid.x_centers[0] == pytest.approx(0.025)
        assert grid.x_centers[-1] == pytest.approx(0.975)

    def test_too_few_cells(self):
        with pytest.raises(InvalidParameter):
            FpGrid(n_cells=8, diffusion_coefficient=0.5)

    def test_default_grid_centers_common_starts(self):
        grid = FpGrid.from_correlation(1.0)
        for x0 in (0.1, 0.3, 0.5, 0.7):
            assert grid.x_centers[grid.cell_of(x0)] == pytest.approx(x0, abs=1e-12)

    def test_diffusion_coefficient_is_half_a(self):
        assert FpGrid.from_correlation(0.8, 64).diffusion_coefficient == pytest.approx(0.4)


class TestGenerator:
    def test_symmetric_with_boundary_loss(self):
        grid = FpGrid(n_cells=32, diffusion_coefficient=0.5)
        matrix = build_generator(grid).toarray()
        scale = grid.diffusion_coefficient / grid.dx**2
        np.testing.assert_allclose(matrix, matrix.T)
        row_sums = matrix.sum(axis=1)
        np.testing.assert_allclose(row_sums[1:-1], 0.0, atol=1e-9 * scale)
        assert row_sums[0] == pytest.approx(-2.0 * scale)
        assert row_sums[-1] == pytest.approx(-2.0 * scale)

    def test_sine_mode_is_exact_eigenvector(self):
        grid = FpGrid(n_cells=64, diffusion_coefficient=0.5)
        mode = np.sin(np.pi * grid.x_centers)
        expected = 2.0 * grid.diffusion_coefficient / grid.dx**2 * (1.0 - np.cos(np.pi * grid.dx))
        np.testing.assert_allclose(build_generator(grid) @ mode, -expected * mode, rtol=1e-9,
                                   atol=1e-9)
        assert smallest_eigenvalue(grid) == pytest.approx(expected, rel=1e-10)

    def test_slowest_decay_time(self):
        grid = FpGrid.from_correlation(1.0)
        assert 1.0 / smallest_eigenvalue(grid) == pytest.approx(2.0 / math.pi**2, rel=1e-3)


class TestSolve:
    def test_absorbed_split(self, solution_03):
        assert solution_03.x0 == pytest.approx(0.3)
        assert solution_03.absorbed_mass_0 == pytest.approx(0.7, abs=1e-3)
        assert solution_03.absorbed_mass_1 == pytest.approx(0.3, abs=1e-3)

    def test_mass_conserved(self, solution_03):
        np.testing.assert_allclose(solution_03.total_mass(), 1.0, atol=1e-9)

    def test_symmetric_start(self, solution_05):
        assert solution_05.absorbed_mass_0 == pytest.approx(solution_05.absorbed_mass_1,
                                                             abs=1e-9)
        assert solution_05.absorbed_mass_1 == pytest.approx(0.5, abs=1e-3)

    def test_density_non_negative(self, solution_03):
        assert np.all(solution_03.density_history >= 0.0)

    def test_frames(self, solution_03):
        density = solution_03.density_frame()
        mass = solution_03.mass_frame()
        assert list(density.columns) == ["t", "x", "density"]
        assert list(mass.columns) == ["t", "mass0", "mass1"]
        assert len(mass) == len(solution_03.times)

    def test_explicit_scheme(self):
        grid = FpGrid.from_correlation(1.0, n_cells=51)
        solution = solve(grid, 0.3, t_end=3.0, dt=1e-4, scheme="explicit")
        np.testing.assert_allclose(solution.total_mass(), 1.0, atol=1e-9)
        assert solution.absorbed_mass_1 == pytest.approx(solution.x0, abs=1e-3)

    @pytest.mark.parametrize("x0", [0.3, 0.01])
    def test_explicit_scheme_at_stability_bound(self, x0):
        grid = FpGrid.from_correlation(1.0, n_cells=51)
        solution = solve(grid, x0, t_end=3.0, dt=stable_explicit_dt(grid), scheme="explicit")
        assert np.abs(solution.total_mass() - 1.0).max() < 1e-6
        assert np.all(solution.density_history >= 0.0)
        assert solution.absorbed_mass_1 == pytest.approx(solution.x0, abs=1e-3)

    def test_explicit_bound_keeps_update_nonnegative(self):
        grid = FpGrid.from_correlation(1.0, n_cells=51)
        update = np.eye(grid.n_cells) + stable_explicit_dt(grid) * build_generator(grid).toarray()
        assert update.min() >= -1e-12

    def test_explicit_step_too_large(self):
        grid = FpGrid.from_correlation(1.0, n_cells=51)
        with pytest.raises(UnstableStep):
            solve(grid, 0.3, t_end=1.0, dt=2.0 * stable_explicit_dt(grid), scheme="explicit")

    @pytest.mark.parametrize("x0", [0.0, 1.0, -0.2])
    def test_start_outside_interval(self, x0):
        with pytest.raises(InvalidParameter):
            solve(FpGrid.from_correlation(1.0, 64), x0, t_end=1.0, dt=1e-3)


class TestDecay:
    def test_decay_rate_matches_eigenvalue(self, solution_05):
        rate = survival_decay_rate(solution_05)
        assert rate == pytest.approx(math.pi**2 / 2.0, rel=0.02)
        grid = FpGrid.from_correlation(1.0)
        assert rate == pytest.approx(smallest_eigenvalue(grid), rel=0.02)

    def test_insufficient_decay(self):
        solution = solve(FpGrid.from_correlation(1.0, 64), 0.5, t_end=0.05, dt=1e-3)
        with pytest.raises(InsufficientDecay):
            survival_decay_rate(solution)

    def test_mean_absorption_time(self, solution_05):
        assert mean_absorption_time(solution_05) == pytest.approx(0.25, rel=1e-2)

    def test_spectral_time_underestimates_mean(self, solution_05):
        grid = FpGrid.from_correlation(1.0)
        assert 1.0 / smallest_eigenvalue(grid) < mean_absorption_time(solution_05)


class TestGridConvergence:
    def test_absorbed_split_converges_at_second_order(self):
        # x0 = 0.5 is a cell center for every odd cell count
        absorbed = [
            solve(FpGrid.from_correlation(1.0, n), 0.5, t_end=0.05, dt=1e-5).absorbed_mass_1
            for n in (101, 201, 401)
        ]
        assert absorbed[0] > 1e-3
        first = abs(absorbed[1] - absorbed[0])
        second = abs(absorbed[2] - absorbed[1])
        assert second < first / 3.0
