"""
Testes da malha, dos campos amostrados e da tabela de nós.
"""

import numpy as np
import pytest

from src.grid import (
    Ball,
    DomainKind,
    Grid,
    GridError,
    NodeFlag,
    ScalarField,
    VectorField,
    gradient,
    read_node_table,
    write_node_table,
)


class TestGrid:
    def test_square_node_classification(self):
        grid = Grid('square', 0.25)
        assert grid.node_count == 25
        assert grid.shape == (5, 5)
        assert grid.interior_indices.size == 9
        assert grid.boundary_indices.size == 16
        assert np.all(grid.in_domain)

    def test_square_measure_is_exact(self, square_grid):
        assert square_grid.measure == pytest.approx(1.0, rel=1e-12)

    def test_disk_measure_close_to_pi(self, fine_disk_grid):
        assert fine_disk_grid.measure == pytest.approx(np.pi, rel=0.02)

    def test_disk_exterior_nodes_have_zero_weight(self, disk_grid):
        exterior = disk_grid.mask == NodeFlag.EXTERIOR
        assert np.any(exterior)
        assert np.all(disk_grid.node_weights[exterior] == 0.0)

    def test_build_matches_constructor(self):
        grid = Grid.build(DomainKind.ANNULUS, 0.125)
        assert grid == Grid('annulus', 0.125)
        assert grid.domain_kind is DomainKind.ANNULUS

    def test_annulus_excludes_inner_hole(self):
        grid = Grid('annulus', 1.0 / 16.0)
        center = grid.nearest_node((0.0, 0.0))
        assert not grid.in_domain[center]
        assert grid.distance_to_boundary((0.5, 0.0)) == pytest.approx(0.25)

    @pytest.mark.parametrize("h", [0.3, 0.0, -0.125, float('nan')])
    def test_invalid_spacing_raises(self, h):
        with pytest.raises(GridError):
            Grid('disk', h)

    def test_only_planar_grids(self):
        with pytest.raises(GridError, match="n=2"):
            Grid('disk', 0.125, n=3)

    def test_unknown_domain(self):
        with pytest.raises(GridError, match=r"unknown domain kind: .triangle. \(use disk, square or annulus\)"):
            DomainKind.parse('triangle')

    def test_equality_depends_on_domain_and_spacing(self):
        assert Grid('disk', 0.125) == Grid('disk', 0.125)
        assert Grid('disk', 0.125) != Grid('square', 0.125)
        assert Grid('disk', 0.125) != Grid('disk', 0.0625)

    def test_ball_nodes_count_lattice_points(self, disk_grid):
        # pontos inteiros com i² + j² <= 16
        nodes = disk_grid.ball_nodes(Ball((0.0, 0.0), 0.25))
        assert nodes.size == 49

    def test_ball_far_outside_has_no_nodes(self, square_grid):
        assert square_grid.ball_nodes(Ball((5.0, 5.0), 0.1)).size == 0

    def test_ball_inside(self, disk_grid):
        assert disk_grid.ball_inside(Ball((0.5, 0.0), 0.5))
        assert not disk_grid.ball_inside(Ball((0.5, 0.0), 0.51))

    def test_ball_rejects_nonpositive_radius(self):
        with pytest.raises(GridError):
            Ball((0.0, 0.0), 0.0)

    def test_triangle_count_on_square(self):
        mesh = Grid('square', 0.25).triangles()
        assert mesh.size == 32
        assert mesh.area == pytest.approx(0.5 * 0.25 ** 2)

    def test_triangle_gradient_exact_for_affine(self, disk_grid):
        mesh = disk_grid.triangles()
        values = 3.0 * disk_grid.x - 2.0 * disk_grid.y + 1.0
        gx, gy = mesh.gradient(values)
        np.testing.assert_allclose(gx, 3.0, atol=1e-12)
        np.testing.assert_allclose(gy, -2.0, atol=1e-12)


class TestFields:
    def test_non_finite_value_outside_singular_nodes(self, disk_grid):
        values = np.zeros(disk_grid.node_count)
        values[disk_grid.nearest_node((0.0, 0.0))] = np.inf
        with pytest.raises(GridError, match="non-finite"):
            ScalarField(disk_grid, values)

    def test_singular_node_may_be_infinite(self, radial_source, disk_grid):
        center = disk_grid.nearest_node((0.0, 0.0))
        assert radial_source.singular_nodes == (center,)
        assert not np.isfinite(radial_source.values[center])
        assert radial_source.singular_point == (0.0, 0.0)

    def test_singular_point_must_be_a_node(self, disk_grid):
        with pytest.raises(GridError, match="not a grid node"):
            ScalarField.from_formula(disk_grid, lambda x, y: x, (0.01, 0.0))

    def test_wrong_length(self, disk_grid):
        with pytest.raises(GridError, match="does not match"):
            ScalarField(disk_grid, np.zeros(3))

    def test_multiply_rejects_other_grid(self, disk_grid, square_grid):
        with pytest.raises(GridError, match="grid mismatch"):
            ScalarField.zeros(disk_grid).multiply(ScalarField.zeros(square_grid))

    def test_abs_pow_and_scaled(self, disk_grid):
        f = ScalarField.from_formula(disk_grid, lambda x, y: x - 0.5)
        g = f.scaled(-2.0).abs_pow(2.0)
        idx = disk_grid.domain_indices
        np.testing.assert_allclose(g.values[idx], 4.0 * (disk_grid.x[idx] - 0.5) ** 2)
        assert g.evaluate(np.array([0.5]), np.array([0.0]))[0] == pytest.approx(0.0)

    def test_exterior_values_are_zero(self, disk_grid):
        f = ScalarField.constant(disk_grid, 2.0)
        assert np.all(f.values[~disk_grid.in_domain] == 0.0)
        assert f.max_abs() == 2.0

    def test_vector_field_shift_and_norm(self, disk_grid):
        G = VectorField.from_formula(disk_grid, lambda x, y: (np.zeros_like(x), np.zeros_like(y)))
        shifted = G.shifted([3.0, 4.0])
        idx = disk_grid.domain_indices
        np.testing.assert_allclose(shifted.norm().values[idx], 5.0)
        assert shifted.max_norm() == pytest.approx(5.0)


class TestGradient:
    def test_exact_for_affine_fields(self, disk_grid):
        u = ScalarField.from_formula(disk_grid, lambda x, y: 2.0 * x - 3.0 * y + 1.0)
        G = gradient(u)
        idx = disk_grid.interior_indices
        np.testing.assert_allclose(G.values[idx, 0], 2.0, atol=1e-10)
        np.testing.assert_allclose(G.values[idx, 1], -3.0, atol=1e-10)

    def test_zero_outside_domain(self, disk_grid):
        u = ScalarField.from_formula(disk_grid, lambda x, y: x * y)
        G = gradient(u)
        assert np.all(G.values[~disk_grid.in_domain] == 0.0)

    def test_second_order_for_quadratic(self):
        grid = Grid('square', 1.0 / 16.0)
        u = ScalarField.from_formula(grid, lambda x, y: x * x + y * y)
        G = gradient(u)
        # diferenças centradas e unilaterais de 2ª ordem são exatas em quadráticas
        np.testing.assert_allclose(G.values[:, 0], 2.0 * grid.x, atol=1e-10)
        np.testing.assert_allclose(G.values[:, 1], 2.0 * grid.y, atol=1e-10)


class TestNodeTable:
    def test_write_then_read(self, tmp_path, disk_grid):
        u = ScalarField.from_formula(disk_grid, lambda x, y: np.cos(x) * y)
        path = write_node_table(u, str(tmp_path / "solution.csv"))
        back = read_node_table(disk_grid, path)
        np.testing.assert_array_equal(back.values, u.values)

    def test_vector_table_columns(self, tmp_path, square_grid):
        u = ScalarField.from_formula(square_grid, lambda x, y: x)
        path = write_node_table(gradient(u), str(tmp_path / "grad.csv"))
        header = open(path, encoding='utf-8').readline().strip()
        assert header == "x,y,flag,gx,gy"

    def test_read_on_other_grid_fails(self, tmp_path, disk_grid):
        path = write_node_table(ScalarField.zeros(disk_grid), str(tmp_path / "u.csv"))
        with pytest.raises(GridError, match="grid mismatch"):
            read_node_table(Grid('disk', 1.0 / 8.0), path)
