"""
Testes dos estimadores de Morrey, do módulo de Stummel-Kato, do ajuste
log-log e da fórmula do expoente previsto.
"""

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as hyp_st

from src.grid import Grid, ScalarField
from src.spaces import (
    BallFamily,
    Branch,
    FitError,
    MorreyIndex,
    SpacesError,
    check_embedding,
    check_embedding_hypothesis,
    check_hypotheses,
    degenerate_rate,
    embedding_refinement_study,
    linear_trend,
    morrey_exponent,
    morrey_norm,
    power_law_fit,
    predicted_alpha,
    singular_rate,
    stummel_decay_slope,
    stummel_modulus,
    stummel_profile,
)
from src.utils.exceptions import HypothesisError


class TestPredictedAlpha:
    def test_degenerate_branch(self):
        prediction = predicted_alpha(2.0, 1.5, 2, 0.9)
        assert prediction.branch is Branch.DEGENERATE
        assert prediction.alpha == pytest.approx(0.5)

    def test_singular_branch(self):
        prediction = predicted_alpha(1.8, 1.5, 2, 0.9)
        assert prediction.branch is Branch.SINGULAR
        assert prediction.alpha == pytest.approx(2.5 - 4.0 / 1.8)

    def test_capped_by_gamma(self):
        assert predicted_alpha(2.0, 1.99, 2, 0.5).alpha == pytest.approx(0.5)

    def test_three_dimensions(self):
        assert predicted_alpha(3.0, 2.5, 3, 0.9).alpha == pytest.approx(0.25)

    def test_to_json_keys(self):
        data = predicted_alpha(2.0, 1.5).to_json()
        assert data['branch'] == 'degenerate'
        assert data['lambda'] == 1.5
        assert set(data) == {'alpha', 'branch', 'gamma_cap', 'p', 'lambda', 'n', 'rate'}

    @pytest.mark.parametrize(
        "p, lam, n, gamma, message",
        [
            (2.0, 1.0, 2, 0.9, "λ ≤ n−1"),
            (2.0, 2.0, 2, 0.9, "λ ≥ n"),
            (2.5, 1.5, 2, 0.9, "p > n"),
            (1.3, 1.9, 2, 0.9, "p ≤ 2n/(λ+1)"),
            (1.0, 1.5, 2, 0.9, "p ≤ 1"),
            (2.0, 1.5, 2, 1.0, "γ ∉ (0,1)"),
            (2.0, 1.5, 1, 0.9, "n < 2"),
        ],
    )
    def test_hypothesis_violations(self, p, lam, n, gamma, message):
        with pytest.raises(HypothesisError) as excinfo:
            predicted_alpha(p, lam, n, gamma)
        assert str(excinfo.value).startswith(message)

    def test_hypothesis_error_is_value_error(self):
        with pytest.raises(ValueError):
            check_hypotheses(2.0, 1.0, 2, 0.9)

    @settings(max_examples=1000)
    @given(
        n=hyp_st.integers(min_value=2, max_value=6),
        t=hyp_st.floats(min_value=0.0, max_value=1.0, exclude_min=True, exclude_max=True),
        gamma=hyp_st.floats(min_value=0.0, max_value=1.0, exclude_min=True, exclude_max=True),
    )
    def test_branches_agree_at_p_two(self, n, t, gamma):
        lam = (n - 1) + t
        assume(n - 1 < lam < n and 2.0 * n / (lam + 1.0) < 2.0)
        rate = singular_rate(2.0, lam, n)
        assert degenerate_rate(2.0, lam, n) == rate
        assert predicted_alpha(2.0, lam, n, gamma).alpha == min(gamma, rate)

    @settings(max_examples=200)
    @given(
        lam=hyp_st.floats(min_value=1.0, max_value=2.0, exclude_min=True, exclude_max=True),
        t=hyp_st.floats(min_value=1e-3, max_value=1.0),
        gamma=hyp_st.floats(min_value=0.05, max_value=0.95),
    )
    def test_alpha_in_unit_range(self, lam, t, gamma):
        lower = 4.0 / (lam + 1.0)
        p = lower + t * (2.0 - lower)
        assume(p > lower)
        alpha = predicted_alpha(p, lam, 2, gamma).alpha
        assert 0.0 < alpha <= gamma

    @given(
        lam1=hyp_st.floats(min_value=1.05, max_value=1.95),
        lam2=hyp_st.floats(min_value=1.05, max_value=1.95),
    )
    def test_monotone_in_lambda(self, lam1, lam2):
        lo, hi = sorted((lam1, lam2))
        assert predicted_alpha(2.0, lo).alpha <= predicted_alpha(2.0, hi).alpha + 1e-15


class TestPowerLawFit:
    def test_exact_power_law(self):
        x = np.geomspace(0.01, 1.0, 12)
        fit = power_law_fit(x, 3.0 * x ** 1.7)
        assert fit.slope == pytest.approx(1.7, abs=1e-10)
        assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-10)
        assert fit.rms_residual < 1e-10
        assert fit.points_used == 12

    @given(
        slope=hyp_st.floats(min_value=-3.0, max_value=3.0),
        scale=hyp_st.floats(min_value=1e-3, max_value=1e3),
    )
    def test_recovers_slope(self, slope, scale):
        x = np.geomspace(0.001, 0.5, 10)
        assert power_law_fit(x, scale * x ** slope).slope == pytest.approx(slope, abs=1e-8)

    def test_non_positive_points_are_dropped(self):
        x = np.array([0.1, 0.2, 0.4, 0.8])
        y = np.array([0.0, 0.2, 0.4, 0.8])
        assert power_law_fit(x, y).points_used == 3

    def test_too_few_points(self):
        with pytest.raises(FitError, match="fewer than"):
            power_law_fit([0.1, 0.2], [0.0, 1.0])

    def test_linear_trend(self):
        x = np.linspace(0.0, 1.0, 5)
        assert linear_trend(x, 2.0 - 0.5 * x) == pytest.approx(-0.5)
        with pytest.raises(FitError):
            linear_trend([1.0, 1.0], [0.0, 1.0])


class TestMorrey:
    def test_index_validation(self):
        with pytest.raises(SpacesError, match="invalid Morrey index"):
            MorreyIndex(0.5, 1.0)
        with pytest.raises(SpacesError, match="invalid Morrey index"):
            MorreyIndex(1.0, 2.5)

    def test_geometric_family(self, fine_disk_grid):
        fam = BallFamily.geometric(fine_disk_grid)
        assert fam.radii[0] == pytest.approx(2.0)
        assert fam.radii[-1] >= 4.0 * fine_disk_grid.h * (1.0 - 1e-12)
        assert np.all(np.diff(fam.radii) < 0.0)
        assert np.all(fine_disk_grid.contains(fam.centers[:, 0], fam.centers[:, 1]))

    def test_family_needs_enough_radii(self, disk_grid):
        with pytest.raises(SpacesError, match="at least"):
            BallFamily.geometric(disk_grid, r_max=0.5)

    def test_family_rejects_small_radius(self, disk_grid):
        with pytest.raises(SpacesError, match="below"):
            BallFamily.geometric(disk_grid, r_min=disk_grid.h)

    def test_family_from_settings(self, fine_disk_grid):
        config = {'spaces': {'ball_ratio': 0.8, 'min_radius_cells': 8}}
        fam = BallFamily.from_settings(fine_disk_grid, config)
        assert fam.radii[1] / fam.radii[0] == pytest.approx(0.8)
        assert fam.radii.size == 10
        assert fam.radii[-1] >= 8.0 * fine_disk_grid.h

    def test_family_from_empty_settings_is_default(self, fine_disk_grid):
        fam = BallFamily.from_settings(fine_disk_grid, {})
        np.testing.assert_array_equal(fam.radii, BallFamily.geometric(fine_disk_grid).radii)

    def test_family_settings_below_four_cells(self, fine_disk_grid):
        with pytest.raises(SpacesError, match="below"):
            BallFamily.from_settings(fine_disk_grid, {'spaces': {'min_radius_cells': 2}})

    def test_norm_of_constant_with_zero_lambda(self, fine_disk_grid):
        f = ScalarField.constant(fine_disk_grid, 2.0)
        report = morrey_norm(f, MorreyIndex(1.0, 0.0), BallFamily.geometric(fine_disk_grid))
        assert report.value == pytest.approx(2.0 * fine_disk_grid.measure, rel=1e-9)
        assert report.argmax_radius >= 1.0

    @given(t=hyp_st.floats(min_value=0.01, max_value=100.0))
    @settings(max_examples=20, deadline=None)
    def test_norm_is_homogeneous(self, t):
        grid = Grid('disk', 1.0 / 32.0)
        f = ScalarField.from_formula(grid, lambda x, y: 1.0 + x * y)
        fam = BallFamily.geometric(grid)
        idx = MorreyIndex(1.0, 1.5)
        assert morrey_norm(f.scaled(-t), idx, fam).value == pytest.approx(t * morrey_norm(f, idx, fam).value, rel=1e-9)

    def test_empty_family(self, disk_grid):
        fam = BallFamily(np.empty((0, 2)), np.array([0.5]))
        with pytest.raises(SpacesError, match="ball family empty"):
            morrey_norm(ScalarField.zeros(disk_grid), MorreyIndex(1.0, 1.0), fam)

    def test_centers_must_be_nodes(self, disk_grid):
        fam = BallFamily(np.array([[0.01, 0.0]]), np.array([0.5]))
        with pytest.raises(SpacesError, match="grid nodes"):
            morrey_norm(ScalarField.zeros(disk_grid), MorreyIndex(1.0, 1.0), fam)

    def test_exponent_of_power_singularity(self, fine_disk_grid):
        f = ScalarField.from_formula(fine_disk_grid, lambda x, y: np.hypot(x, y) ** -0.5, (0.0, 0.0))
        fit = morrey_exponent(f, BallFamily.geometric(fine_disk_grid))
        assert fit.slope == pytest.approx(1.5, abs=0.1)

    def test_embedding_hypothesis(self):
        check_embedding_hypothesis(MorreyIndex(2.0, 1.0), MorreyIndex(1.0, 1.5))
        with pytest.raises(HypothesisError, match="embedding hypothesis violated"):
            check_embedding_hypothesis(MorreyIndex(1.0, 1.5), MorreyIndex(2.0, 1.0))
        with pytest.raises(HypothesisError, match="embedding hypothesis violated"):
            check_embedding_hypothesis(MorreyIndex(2.0, 0.0), MorreyIndex(1.0, 1.5))

    def test_embedding_ratio_is_finite(self, fine_disk_grid):
        f = ScalarField.from_formula(fine_disk_grid, lambda x, y: np.hypot(x, y) ** -0.25, (0.0, 0.0))
        report = check_embedding(f, MorreyIndex(2.0, 1.0), MorreyIndex(1.0, 1.5), BallFamily.geometric(fine_disk_grid))
        assert np.isfinite(report.ratio) and report.ratio > 0.0
        assert set(report.to_json()) == {'to', 'from', 'ratio'}

    @pytest.mark.slow
    def test_embedding_ratio_stable_under_refinement(self):
        table = embedding_refinement_study(
            lambda x, y: np.hypot(x, y) ** -0.25,
            MorreyIndex(2.0, 1.0),
            MorreyIndex(1.0, 1.5),
            [1.0 / 32.0, 1.0 / 64.0],
            singular_point=(0.0, 0.0),
        )
        assert list(table.columns) == ['h', 'norm_to', 'norm_from', 'ratio', 'drift']
        assert np.isnan(table['drift'].iloc[0])
        assert np.all(np.isfinite(table['ratio']))
        assert table['drift'].iloc[1] <= 0.1

    def test_refinement_of_zero_data_has_no_drift(self):
        table = embedding_refinement_study(
            lambda x, y: np.zeros_like(x),
            MorreyIndex(2.0, 1.0),
            MorreyIndex(1.0, 1.5),
            [1.0 / 16.0, 1.0 / 32.0],
            ratio=0.8,
        )
        np.testing.assert_array_equal(table['ratio'], 0.0)
        assert table['drift'].iloc[1] == 0.0

    def test_refinement_checks_hypothesis(self):
        with pytest.raises(HypothesisError, match="embedding hypothesis violated"):
            embedding_refinement_study(lambda x, y: x, MorreyIndex(1.0, 1.5), MorreyIndex(2.0, 1.0), [0.125])


class TestStummel:
    def test_kernel_requires_p_below_n(self, disk_grid):
        with pytest.raises(HypothesisError, match="kernel requires p < n"):
            stummel_modulus(ScalarField.zeros(disk_grid), 2.0, 0.5, [(0.0, 0.0)])

    def test_radius_below_four_cells(self, disk_grid):
        with pytest.raises(SpacesError, match="radius below"):
            stummel_modulus(ScalarField.zeros(disk_grid), 1.0, disk_grid.h, [(0.0, 0.0)])

    def test_profile_is_monotone(self, radial_source):
        radii = np.geomspace(0.3, 0.6, 6)
        profile = stummel_profile(radial_source, 1.0, radii, [(0.0, 0.0), (0.25, 0.0)])
        assert np.all(np.diff(profile.eta) >= 0.0)

    def test_modulus_matches_profile(self, radial_source):
        profile = stummel_profile(radial_source, 1.0, [0.3, 0.5], [(0.0, 0.0)])
        assert stummel_modulus(radial_source, 1.0, 0.5, [(0.0, 0.0)]) == pytest.approx(profile.eta[-1])

    def test_zero_data_is_trivial(self, disk_grid):
        report = stummel_decay_slope(ScalarField.zeros(disk_grid), 1.0, np.geomspace(0.3, 0.9, 6), [(0.0, 0.0)], lam=1.5)
        assert report.passed
        assert report.slope == np.inf

    def test_decay_slope_of_power_singularity(self, fine_disk_grid):
        # η(r) = 4π r^{1/2} para |x|^{-1/2} com p = 1: inclinação λ - n + p = 1/2
        f = ScalarField.from_formula(fine_disk_grid, lambda x, y: np.hypot(x, y) ** -0.5, (0.0, 0.0))
        radii = np.geomspace(0.5, 0.13, 8)
        report = stummel_decay_slope(f, 1.0, radii, [(0.0, 0.0)], lam=1.5)
        assert report.passed
        assert report.bound == pytest.approx(0.5)
        assert 0.4 < report.slope < 0.7

    def test_decay_needs_six_radii(self, radial_source):
        with pytest.raises(SpacesError, match="at least"):
            stummel_decay_slope(radial_source, 1.0, [0.3, 0.4, 0.5], [(0.0, 0.0)])
