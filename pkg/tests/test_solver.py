"""
Testes do solver p-Poisson, da substituição p-harmônica, do resíduo fraco
e do oráculo radial.
"""

import numpy as np
import pytest
import sympy as sp

from src.grid import Ball, Grid, ScalarField
from src.solver import (
    ConvergenceError,
    PEnergy,
    PPoissonSolver,
    SolverConfig,
    SolverError,
    convergence_study,
    dirichlet_energy,
    flux,
    make_test_function,
    p_harmonic_replacement,
    radial_operator_residual,
    radial_oracle,
    solve_p_poisson,
    support_inside,
    test_family as build_test_family,
    weak_residual,
)
from src.utils.config import DEFAULT_CONFIG


def _paraboloid(grid):
    return ScalarField.from_formula(grid, lambda x, y: x * x + y * y)


class TestSolverConfig:
    def test_defaults(self):
        cfg = SolverConfig()
        assert cfg.tolerance == 1e-8
        assert cfg.kappa_schedule() == [0.0]
        assert SolverConfig(p=3.0).tolerance == 1e-6

    def test_annealing_schedule(self):
        stages = SolverConfig(p=1.5, kappa0=0.02, anneal_stages=3).kappa_schedule()
        assert stages == pytest.approx([0.02, 0.01, 0.005])
        assert SolverConfig(p=1.5, polish=True).kappa_schedule()[-1] == 0.0
        assert SolverConfig(p=1.5, kappa=0.1).kappa_schedule() == [0.1]

    @pytest.mark.parametrize(
        "changes, message",
        [
            ({'p': 1.0}, "p must be > 1"),
            ({'p': 1.5, 'kappa': 0.0}, "p < 2 requires kappa > 0"),
            ({'tol': 0.0}, "tol must be > 0"),
            ({'backtrack': 1.0}, "backtrack"),
            ({'max_iter': 0}, "max_iter"),
        ],
    )
    def test_invalid_values(self, changes, message):
        with pytest.raises(SolverError, match=message):
            SolverConfig(**changes)

    def test_text_format_preserves_every_field(self):
        cfg = SolverConfig(p=1.5, kappa0=0.02, anneal_stages=4, tol=1e-7, polish=True)
        assert SolverConfig.from_text(cfg.to_text()) == cfg

    def test_text_comments_and_base(self):
        base = SolverConfig(p=1.5)
        cfg = SolverConfig.from_text("# comentário\nmax_iter = 50  # por estágio\n\nkappa = none\n", base)
        assert cfg.max_iter == 50
        assert cfg.kappa is None
        assert cfg.p == 1.5

    @pytest.mark.parametrize(
        "text, message",
        [
            ("colour = red", "unknown key"),
            ("max_iter 10", "key = value"),
            ("polish = maybe", "invalid boolean"),
            ("max_iter = many", "invalid value"),
            ("p = none", "cannot be empty"),
        ],
    )
    def test_text_errors(self, text, message):
        with pytest.raises(SolverError, match=message):
            SolverConfig.from_text(text)

    def test_from_file(self, tmp_path):
        path = tmp_path / "solver.cfg"
        path.write_text("p = 1.8\ntol = 1e-5\n", encoding='utf-8')
        cfg = SolverConfig.from_file(str(path))
        assert cfg.p == 1.8 and cfg.tol == 1e-5

    def test_from_settings_uses_branch_tolerance(self):
        assert SolverConfig.from_settings(DEFAULT_CONFIG, p=2.0).tolerance == 1e-8
        assert SolverConfig.from_settings(DEFAULT_CONFIG, p=1.5).tolerance == 1e-6
        assert SolverConfig.from_settings(DEFAULT_CONFIG, p=1.5, tol=1e-4).tolerance == 1e-4

    def test_branch_tolerance_follows_replaced_p(self):
        shared = SolverConfig.from_settings(DEFAULT_CONFIG, p=2.0)
        assert shared.replace(p=1.8).tolerance == 1e-6
        assert shared.replace(p=1.8).replace(p=2.0).tolerance == 1e-8
        pinned = SolverConfig.from_settings(DEFAULT_CONFIG, p=2.0, tol=1e-5)
        assert pinned.replace(p=1.8).tolerance == 1e-5

    def test_branch_tolerances_come_from_settings(self):
        config = {'solver': {'tol': 1e-4, 'tol_p2': 1e-7}}
        cfg = SolverConfig.from_settings(config, p=2.0)
        assert cfg.tolerance == 1e-7
        assert cfg.replace(p=1.5).tolerance == 1e-4


class TestEnergy:
    def test_gradient_matches_finite_differences(self):
        grid = Grid('square', 0.25)
        rng = np.random.default_rng(7)
        free = grid.interior_indices
        base = rng.normal(size=grid.node_count)
        load = rng.normal(size=grid.node_count)
        problem = PEnergy(grid.triangles(), 1.5, free, base, load)
        x = rng.normal(size=free.size)
        kappa, step = 0.1, 1e-6
        numeric = np.empty(free.size)
        for k in range(free.size):
            e = np.zeros(free.size)
            e[k] = step
            numeric[k] = (problem.energy(x + e, kappa) - problem.energy(x - e, kappa)) / (2.0 * step)
        np.testing.assert_allclose(problem.gradient(x, kappa), numeric, rtol=1e-5, atol=1e-7)

    def test_hessian_is_symmetric(self):
        grid = Grid('square', 0.25)
        free = grid.interior_indices
        problem = PEnergy(grid.triangles(), 3.0, free, np.arange(grid.node_count, dtype=float))
        H = problem.hessian(np.linspace(0.0, 1.0, free.size), 0.0).toarray()
        np.testing.assert_allclose(H, H.T, atol=1e-12)
        assert np.all(np.linalg.eigvalsh(H) > 0.0)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_energy_of_unit_slope(self, square_grid, p):
        u = ScalarField.from_formula(square_grid, lambda x, y: x)
        assert dirichlet_energy(u, p) == pytest.approx(1.0, rel=1e-12)

    def test_flux_vanishes_at_zero(self):
        fx, fy = flux(np.array([0.0, 3.0]), np.array([0.0, 4.0]), 1.5)
        assert fx[0] == 0.0 and fy[0] == 0.0
        assert np.hypot(fx[1], fy[1]) == pytest.approx(5.0 ** 0.5)


class TestPPoissonSolver:
    @pytest.mark.parametrize("domain", ['square', 'disk'])
    def test_quadratic_solution_is_reproduced(self, domain):
        # -Δ(x² + y²) = -4 e o estêncil de 5 pontos é exato para quadráticas
        grid = Grid(domain, 1.0 / 16.0)
        exact = _paraboloid(grid)
        result = PPoissonSolver(SolverConfig(p=2.0)).solve(ScalarField.constant(grid, -4.0), exact)
        idx = grid.domain_indices
        assert np.max(np.abs(result.u.values[idx] - exact.values[idx])) < 1e-6
        assert result.converged
        assert result.residual < 1e-8

    def test_history_frame(self, square_grid):
        result = PPoissonSolver().solve(ScalarField.constant(square_grid, 1.0), ScalarField.zeros(square_grid))
        frame = result.history_frame()
        assert list(frame.columns) == ['iter', 'energy', 'residual', 'step', 'kappa']
        assert frame['residual'].iloc[-1] == pytest.approx(result.residual)

    def test_boundary_values_are_kept(self, disk_grid):
        g = ScalarField.from_formula(disk_grid, lambda x, y: 0.3 + x)
        u = solve_p_poisson(ScalarField.constant(disk_grid, 1.0), g, SolverConfig(p=1.5, tol=1e-5))
        boundary = disk_grid.boundary_indices
        np.testing.assert_array_equal(u.values[boundary], g.values[boundary])

    def test_p_above_dimension(self, disk_grid):
        with pytest.raises(SolverError, match="p > n"):
            PPoissonSolver(SolverConfig(p=3.0)).solve(ScalarField.zeros(disk_grid), ScalarField.zeros(disk_grid))

    def test_grid_mismatch(self, disk_grid, square_grid):
        with pytest.raises(SolverError, match="grid mismatch"):
            solve_p_poisson(ScalarField.zeros(disk_grid), ScalarField.zeros(square_grid))

    def test_convergence_failure(self, disk_grid):
        f = ScalarField.constant(disk_grid, 1.0)
        cfg = SolverConfig(p=1.5, tol=1e-14, max_iter=1, anneal_stages=1)
        with pytest.raises(ConvergenceError, match=r"solver did not converge: residual .* after \d+ iterations") as excinfo:
            PPoissonSolver(cfg).solve(f, ScalarField.zeros(disk_grid))
        assert excinfo.value.last_residual > 1e-14
        assert isinstance(excinfo.value, SolverError)

    def test_zero_data_gives_zero(self, disk_grid):
        u = solve_p_poisson(ScalarField.zeros(disk_grid), ScalarField.zeros(disk_grid), SolverConfig(p=1.5))
        assert np.max(np.abs(u.values)) < 1e-10


class TestReplacement:
    def test_affine_function_is_its_own_replacement(self, disk_grid):
        u = ScalarField.from_formula(disk_grid, lambda x, y: x + 2.0 * y)
        v = p_harmonic_replacement(u, Ball((0.0, 0.0), 0.5), 2.0)
        np.testing.assert_allclose(v.values, u.values, atol=1e-8)

    @pytest.mark.parametrize("p", [1.5, 2.0])
    def test_replacement_lowers_energy(self, disk_grid, p):
        u = radial_oracle(0.5, p=p).sample(disk_grid)
        b = Ball((0.1, 0.0), 0.6)
        v = p_harmonic_replacement(u, b, p)
        nodes = disk_grid.ball_nodes(b)
        assert dirichlet_energy(v, p, nodes) <= dirichlet_energy(u, p, nodes) * (1.0 + 1e-12)
        outside = np.setdiff1d(disk_grid.domain_indices, nodes)
        np.testing.assert_array_equal(v.values[outside], u.values[outside])

    def test_ball_too_small(self, disk_grid):
        u = ScalarField.zeros(disk_grid)
        with pytest.raises(SolverError, match="ball too small"):
            p_harmonic_replacement(u, Ball((0.0, 0.0), 4.0 * disk_grid.h), 2.0)

    def test_ball_outside_domain(self, disk_grid):
        u = ScalarField.zeros(disk_grid)
        with pytest.raises(SolverError, match="exits"):
            p_harmonic_replacement(u, Ball((0.6, 0.0), 0.5), 2.0)


class TestWeakForm:
    def test_exact_quadratic_has_zero_residual(self):
        grid = Grid('square', 1.0 / 32.0)
        family = build_test_family(grid, count=10, seed=1, radius_range=(0.15, 0.3))
        residual = weak_residual(_paraboloid(grid), ScalarField.constant(grid, -4.0), 2.0, family)
        assert residual.value < 1e-9
        assert residual.test_family_size == 10

    def test_wrong_source_is_detected(self):
        grid = Grid('square', 1.0 / 32.0)
        family = build_test_family(grid, count=5, seed=2, radius_range=(0.15, 0.3))
        residual = weak_residual(_paraboloid(grid), ScalarField.constant(grid, 4.0), 2.0, family)
        assert residual.value > 1e-3

    def test_family_is_reproducible(self, disk_grid):
        a = build_test_family(disk_grid, count=6, seed=3, radius_range=(0.2, 0.4))
        b = build_test_family(disk_grid, count=6, seed=3, radius_range=(0.2, 0.4))
        assert [t.ball.center for t in a] == [t.ball.center for t in b]
        assert [t.kind for t in a] == ['tent', 'bump'] * 3

    def test_test_functions_have_compact_support(self, disk_grid):
        for phi in build_test_family(disk_grid, count=8, seed=4, radius_range=(0.2, 0.4)):
            assert support_inside(phi.field, phi.ball)

    def test_small_ball_rejected(self, disk_grid):
        with pytest.raises(SolverError, match="too small"):
            make_test_function(disk_grid, Ball((0.0, 0.0), 1.5 * disk_grid.h))

    def test_unknown_kind(self, disk_grid):
        with pytest.raises(SolverError, match="unknown test function kind"):
            build_test_family(disk_grid, count=1, kind='wavelet')

    def test_empty_family(self, disk_grid):
        with pytest.raises(SolverError, match="empty test family"):
            weak_residual(ScalarField.zeros(disk_grid), ScalarField.zeros(disk_grid), 2.0, [])


class TestRadialOracle:
    @pytest.mark.parametrize("s, p", [(0.0, 2.0), (0.5, 2.0), (0.3, 1.5), (0.5, 1.8)])
    def test_self_check(self, s, p):
        report = radial_oracle(s, p=p).verify()
        assert report['operator_error'] < 1e-10
        assert report['integral_error'] < 1e-10

    def test_default_amplitude_normalises_peak(self):
        oracle = radial_oracle(0.5, p=1.5)
        assert float(oracle.u(0.0)) == pytest.approx(1.0)
        assert float(oracle.u(1.0)) == pytest.approx(0.0)

    def test_morrey_and_holder_exponents(self):
        oracle = radial_oracle(0.4, p=2.0)
        assert oracle.lam == pytest.approx(1.6)
        assert oracle.gradient_holder == pytest.approx(0.6)
        assert radial_oracle(0.1, p=1.5).gradient_holder == 1.0

    @pytest.mark.parametrize(
        "kwargs, message",
        [
            ({'s': 2.0}, "s must lie"),
            ({'s': 0.5, 'p': 1.0}, "p must be > 1"),
            ({'s': 0.5, 'p': 2.5}, "p > n"),
            ({'s': 1.2, 'p': 1.1}, "s must be < p"),
            ({'s': 0.5, 'c': -1.0}, "c must be > 0"),
        ],
    )
    def test_invalid_parameters(self, kwargs, message):
        with pytest.raises(SolverError, match=message):
            radial_oracle(**kwargs)

    def test_operator_residual_detects_wrong_source(self):
        r = sp.Symbol('r', positive=True)
        du = -r / 2
        assert radial_operator_residual(du, sp.Integer(1), r, 2.0, 2) < 1e-12
        assert radial_operator_residual(du, sp.Integer(2), r, 2.0, 2) > 0.1

    def test_sampled_gradient_points_inward(self, disk_grid):
        G = radial_oracle(0.5).sample_gradient(disk_grid)
        k = disk_grid.nearest_node((0.5, 0.0))
        assert G.values[k, 0] < 0.0
        assert G.values[k, 1] == pytest.approx(0.0)


@pytest.mark.slow
class TestConvergence:
    def test_p_two_nodal_error_decreases(self):
        oracle = radial_oracle(0.5, p=2.0)
        table = convergence_study(
            lambda x, y: oracle.source(np.hypot(x, y)),
            lambda x, y: oracle.u(np.hypot(x, y)),
            [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0],
            SolverConfig(p=2.0),
            singular_point=(0.0, 0.0),
        )
        errors = table['error'].to_numpy()
        assert np.all(np.diff(errors) < 0.0)
        assert table['order'].iloc[-1] > 0.8

    def test_singular_branch_converges(self):
        oracle = radial_oracle(0.3, p=1.5)
        table = convergence_study(
            lambda x, y: oracle.source(np.hypot(x, y)),
            lambda x, y: oracle.u(np.hypot(x, y)),
            [1.0 / 16.0, 1.0 / 32.0],
            SolverConfig(p=1.5),
            singular_point=(0.0, 0.0),
        )
        assert table['error'].iloc[-1] < table['error'].iloc[0]
        assert table['error'].iloc[-1] < 0.05
