"""
Testes dos casos de referência e da execução da suíte.
"""

import numpy as np
import pytest

from src.analysis import ProfileSettings
from src.bench import (
    BENCH_COLUMNS,
    NOT_C1,
    BenchmarkError,
    CaseResult,
    SignConvention,
    affine_case,
    case_matrix,
    default_matrix,
    parse_case,
    radial_case,
    results_frame,
    run_case,
    run_suite,
    serrin_case,
    sharpness_witness,
)


class TestRadialCase:
    def test_degenerate_values(self):
        case = radial_case(0.5)
        assert case.id == "radial-s0.5-p2-n2"
        assert case.lambda_true == pytest.approx(1.5)
        assert case.alpha_true == pytest.approx(0.5)
        assert case.alpha_pred == pytest.approx(0.5)
        assert case.singular

    def test_singular_branch_values(self):
        case = radial_case(0.5, p=1.8)
        assert case.alpha_true == pytest.approx(0.625)
        assert case.alpha_pred == pytest.approx(0.2778, abs=1e-4)

    def test_smooth_source_has_no_prediction(self):
        case = radial_case(0.0)
        assert not case.singular
        assert case.alpha_true == 1.0
        assert case.alpha_pred is None

    @pytest.mark.parametrize("s", [1.0, 1.5, -0.1])
    def test_inadmissible_singularity(self, s):
        with pytest.raises(BenchmarkError, match="admissible Morrey range"):
            radial_case(s)

    def test_fields_on_grid(self, disk_grid):
        case = radial_case(0.5)
        f = case.source_field(disk_grid)
        assert f.singular_point == (0.0, 0.0)
        u = case.exact_field(disk_grid)
        assert u.values[disk_grid.nearest_node((0.0, 0.0))] == pytest.approx(1.0)
        G = case.exact_gradient(disk_grid)
        np.testing.assert_array_equal(G.values[disk_grid.nearest_node((0.0, 0.0))], [0.0, 0.0])

    def test_three_dimensional_case_needs_oracle_path(self, disk_grid):
        with pytest.raises(BenchmarkError, match="oracle path"):
            radial_case(0.5, n=3).source_field(disk_grid)

    def test_to_json(self):
        data = radial_case(0.2).to_json()
        assert data['family'] == 'radial'
        assert data['params']['s'] == 0.2
        assert data['domain'] == 'disk'


class TestSerrinCase:
    def test_values(self):
        case = serrin_case(0.75)
        assert case.params['exponent'] == pytest.approx(-1.25)
        assert case.lambda_true == pytest.approx(0.75)
        assert case.params['amplitude'] == pytest.approx(0.5625)
        assert case.alpha_true == NOT_C1
        assert case.u_holder == 0.75
        assert case.note == "not C¹, λ=0.75 ≤ n−1"
        assert case.alpha_pred is None

    def test_negate_u_convention(self):
        case = serrin_case(0.75)
        assert case.params['sign'] == 'negate_u'
        assert case.u(0.5) == pytest.approx(-(0.5 ** 0.75))
        assert case.source(0.5) > 0.0

    def test_negate_f_convention(self):
        case = serrin_case(0.75, sign_convention='negate_f')
        assert case.u(0.5) == pytest.approx(0.5 ** 0.75)
        assert case.source(0.5) < 0.0

    def test_invalid_parameters(self):
        with pytest.raises(BenchmarkError, match="gamma must lie"):
            serrin_case(1.5)
        with pytest.raises(BenchmarkError, match="p must lie"):
            serrin_case(0.75, p=2.5)

    def test_sign_convention_parse(self):
        assert SignConvention.parse('NEGATE_F') is SignConvention.NEGATE_F
        assert SignConvention.parse(SignConvention.NEGATE_U) is SignConvention.NEGATE_U
        with pytest.raises(BenchmarkError, match="unknown sign convention"):
            SignConvention.parse('flip')


class TestAffineCase:
    def test_zero_source_and_exact_fields(self, disk_grid):
        case = affine_case((1.0, -2.0), 0.5)
        assert case.family == 'affine'
        assert not case.singular
        assert case.lambda_true == 2.0
        assert case.alpha_true == 1.0
        assert np.all(case.source_field(disk_grid).values == 0.0)
        idx = disk_grid.domain_indices
        u = case.exact_field(disk_grid)
        np.testing.assert_allclose(u.values[idx], disk_grid.x[idx] - 2.0 * disk_grid.y[idx] + 0.5)
        G = case.exact_gradient(disk_grid)
        np.testing.assert_allclose(G.values[idx], np.tile([1.0, -2.0], (idx.size, 1)))

    def test_boundary_data_is_the_affine_field(self, square_grid):
        case = affine_case((0.3, 0.7), 1.0, p=1.5)
        np.testing.assert_array_equal(case.boundary_field(square_grid).values, case.exact_field(square_grid).values)

    @pytest.mark.parametrize("kwargs", [{'n': 3}, {'p': 2.5}, {'p': 1.0}])
    def test_rejects(self, kwargs):
        with pytest.raises(BenchmarkError):
            affine_case(**kwargs)


class TestCaseMatrix:
    def test_inadmissible_combinations_are_skipped(self):
        cases = case_matrix([2.0, 3.0], [0.2, 1.2])
        assert [c.id for c in cases] == ["radial-s0.2-p2-n2"]

    def test_radial_and_serrin(self):
        cases = case_matrix([2.0], [0.5], gammas=[0.75])
        assert [c.family for c in cases] == ['radial', 'serrin']

    def test_default_matrix(self):
        ids = [c.id for c in default_matrix()]
        assert len(ids) == 5
        assert "radial-s0.5-p1.8-n2" in ids
        assert "serrin-g0.75-p2-n2" in ids

    @pytest.mark.parametrize(
        "spec, expected",
        [
            ("radial-0.5", "radial-s0.5-p2-n2"),
            ("serrin-0.75", "serrin-g0.75-p2-n2"),
            ("affine-2", "affine-a2-b1-p2-n2"),
            ("zero", "affine-a1-b0.5-p2-n2"),
        ],
    )
    def test_parse_case(self, spec, expected):
        assert parse_case(spec).id == expected

    @pytest.mark.parametrize("spec", ["cube-1", "radial-x", "radial", "affine"])
    def test_parse_case_rejects(self, spec):
        with pytest.raises(BenchmarkError, match=r"invalid case spec .* or affine-<a>\)"):
            parse_case(spec)


class TestRunSuite:
    def test_oracle_path_in_three_dimensions(self):
        result = run_case(radial_case(0.5, n=3))
        assert result.alpha_pred == pytest.approx(0.5)
        assert result.alpha_hat == pytest.approx(0.5, abs=1e-6)
        assert result.passed
        assert result.residual is None

    def test_failing_case_becomes_row(self):
        results = run_suite([serrin_case(0.75, n=3), radial_case(0.5, n=3)])
        assert [r.id for r in results] == ["radial-s0.5-p2-n3", "serrin-g0.75-p2-n3"]
        failed = results[1]
        assert not failed.passed
        assert failed.alpha_hat is None
        assert "oracle path" in failed.note

    def test_threads_keep_order(self):
        cases = [radial_case(s, n=3) for s in (0.8, 0.2, 0.5)]
        results = run_suite(cases, threads=3)
        assert [r.id for r in results] == sorted(c.id for c in cases)
        assert all(r.passed for r in results)

    def test_results_frame(self):
        frame = results_frame([CaseResult('a', 2.0, 1.5, 0.5, 0.51, True)])
        assert list(frame.columns) == BENCH_COLUMNS
        assert bool(frame['pass'].iloc[0])
        assert set(CaseResult('a', 2.0, 1.5, None, None, False).to_json()) >= set(BENCH_COLUMNS)

    def test_empty_suite(self):
        assert run_suite([]) == []

    def test_sharpness_requires_serrin(self):
        with pytest.raises(BenchmarkError, match="requires a Serrin case"):
            sharpness_witness(radial_case(0.5))
        with pytest.raises(BenchmarkError, match="at least two grids"):
            sharpness_witness(serrin_case(0.75), hs=[1.0 / 32.0])


@pytest.mark.slow
class TestAcceptance:
    def test_radial_oracle_on_grid(self):
        result = run_case(radial_case(0.5), h=1.0 / 64.0, oracle=True)
        assert result.passed, result.to_json()

    def test_profile_settings_set_the_window(self):
        profile = ProfileSettings(window_min_cells=6, window_fraction=0.5)
        result = run_case(radial_case(0.5), h=1.0 / 64.0, oracle=True, profile=profile)
        assert result.window == pytest.approx((6.0 / 64.0, 0.5))
        assert result.alpha_hat == pytest.approx(0.5, abs=0.05)

    def test_radial_solver_on_grid(self):
        result = run_case(radial_case(0.5), h=1.0 / 64.0)
        assert result.alpha_hat == pytest.approx(0.5, abs=0.05)
        assert result.iterations >= 0

    def test_serrin_sharpness_witness(self):
        report = sharpness_witness(serrin_case(0.75))
        assert report.morrey_exponent == pytest.approx(0.75, abs=0.1)
        assert all(ratio > 1.0 for ratio in report.growth_ratios)
        assert report.hs[-1] == pytest.approx(1.0 / 128.0)
