"""Closed-form stiffness triples, limits and profiles."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core import closed_form as cf
from core.errors import DomainError, GridPointError, ParameterDomainError, UnsupportedModelError
from core.materials import PRESETS, MaterialParameters
from core.models import ModelKind, polar_moment

R = 1.0
IP = math.pi / 2.0
FINITE_LC = (0.1, 1.0, 10.0)


def _preset(name, **overrides):
    preset = PRESETS[name]
    params = preset['params']
    if overrides:
        params = params.replace(**overrides)
    return preset['model'], params


class TestCauchy:

    def test_value(self):
        triple = cf.cauchy_stiffness(1 / 14, R)
        assert triple.T_w == pytest.approx(math.pi / 28, rel=1e-14)
        assert triple.T_c == triple.T_w
        assert triple.T_m == 0.0

    def test_rejects_bad_radius(self):
        with pytest.raises(DomainError):
            cf.cauchy_stiffness(1.0, 0.0)
        with pytest.raises(DomainError):
            cf.cauchy_stiffness(1.0, math.inf)

    def test_rejects_nonpositive_modulus(self):
        with pytest.raises(ParameterDomainError):
            cf.cauchy_stiffness(0.0, R)


class TestEnergyConsistency:

    @pytest.mark.parametrize('name', sorted(PRESETS))
    @pytest.mark.parametrize('Lc', FINITE_LC)
    def test_force_and_moment_parts_add_up(self, name, Lc):
        model, params = _preset(name, Lc=Lc)
        triple = cf.stiffness(model, params, R)
        assert triple.T_c + triple.T_m == pytest.approx(triple.T_w, rel=1e-10)

    @pytest.mark.parametrize('name', sorted(PRESETS))
    def test_classical_stiffness_at_zero_length(self, name):
        model, params = _preset(name, Lc=0.0)
        triple = cf.stiffness(model, params, R)
        assert triple.T_w == pytest.approx(params.mu_macro * IP, rel=1e-14)
        assert triple.T_m == 0.0

    @pytest.mark.parametrize('name', sorted(PRESETS))
    def test_continuous_at_zero_length(self, name):
        model, params = _preset(name, Lc=1e-8)
        triple = cf.stiffness(model, params, R)
        assert triple.T_w == pytest.approx(params.mu_macro * IP, rel=1e-6)

    def test_cosserat_curve_increases(self):
        model, params = _preset('cosserat')
        curve = cf.stiffness_curve(model, params, R, np.logspace(-3, 3, 40))
        t_w = [t.T_w for t in curve]
        assert all(b >= a for a, b in zip(t_w, t_w[1:]))

    @settings(max_examples=30)
    @given(st.floats(min_value=0.1, max_value=10.0))
    def test_scale_invariance(self, scale):
        model, params = _preset('relaxed', Lc=0.5)
        base = cf.stiffness(model, params, 1.0).T_w
        scaled = cf.stiffness(model, params.replace(Lc=0.5 * scale), scale).T_w
        assert scaled / scale ** 4 == pytest.approx(base, rel=1e-10)


class TestLimits:

    def test_conformal_cosserat_is_bounded(self):
        model, params = _preset('cosserat-conformal')
        result = cf.limits(model, params, R)
        assert result['bounded']
        assert result['Lc_inf'] == pytest.approx(5.0 * math.pi / 2.0, rel=1e-14)
        assert result['Lc_inf'] == pytest.approx(cf.cosserat_conformal_limit(params, R), rel=1e-14)
        assert result['growth_coefficient'] == 0.0

    def test_conformal_cosserat_approaches_limit(self):
        model, params = _preset('cosserat-conformal', Lc=1e4)
        triple = cf.stiffness(model, params, R)
        assert triple.T_w == pytest.approx(5.0 * math.pi / 2.0, rel=1e-6)

    def test_cosserat_grows_quadratically(self):
        model, params = _preset('cosserat')
        result = cf.limits(model, params, R)
        assert not result['bounded']
        assert math.isinf(result['Lc_inf'])
        assert result['growth_coefficient'] == pytest.approx(24 / 47, rel=1e-14)

        Lc = 1e4
        t_w = cf.stiffness(model, params.replace(Lc=Lc), R).T_w
        assert t_w / (Lc / R) ** 2 / IP == pytest.approx(24 / 47, rel=1e-6)

    def test_relaxed_conformal_limit(self):
        _, params = _preset('relaxed', a3=0.0, Lc=math.inf)
        t_w = cf.stiffness('RelaxedConformal', params, R).T_w
        assert t_w == pytest.approx(cf.relaxed_conformal_limit(params, R), rel=1e-12)
        stiff = 9 * 0.5 + 0.1
        assert t_w == pytest.approx(0.25 * stiff / (stiff + 0.25) * IP, rel=1e-12)

    def test_relaxed_is_bounded(self):
        model, params = _preset('relaxed')
        result = cf.limits(model, params, R)
        assert result['bounded']
        assert result['Lc_zero'] < result['Lc_inf']

    def test_micro_strain_saturates_at_meso_modulus(self):
        model, params = _preset('micro-strain', Lc=math.inf)
        assert cf.stiffness(model, params, R).T_w == pytest.approx(params.mu_e * IP, rel=1e-12)

    def test_micromorphic_growth(self):
        model, params = _preset('micromorphic')
        result = cf.limits(model, params, R)
        assert not result['bounded']
        assert result['growth_coefficient'] == pytest.approx(4 * (1 / 6))


class TestModelCollapse:

    def test_cosserat_with_stiff_skew_modulus_is_couple_stress(self):
        _, params = _preset('cosserat', mu_c=1e12, Lc=1.0)
        cosserat = cf.stiffness('Cosserat', params, R).T_w
        couple = cf.couple_stress_stiffness(params.mu_macro, params.mu, params.a1, 1.0, R).T_w
        assert couple == pytest.approx((1 / 14 + 3 * 0.2) * IP, rel=1e-14)
        assert cosserat == pytest.approx(couple, rel=1e-5)

    def test_relaxed_with_stiff_micro_scale_is_cosserat(self):
        params = PRESETS['relaxed']['params'].with_overrides(mu_micro=1e10, Lc=1.0)
        relaxed = cf.stiffness('RelaxedMicromorphic', params, R).T_w
        cosserat = cf.cosserat_stiffness(params.replace(mu_macro=params.mu_e), R).T_w
        assert relaxed == pytest.approx(cosserat, rel=1e-4)

    def test_relaxed_infinite_micro_scale_delegates(self):
        params = PRESETS['relaxed']['params'].with_overrides(mu_micro=math.inf, Lc=1.0)
        relaxed = cf.stiffness('RelaxedMicromorphic', params, R).T_w
        cosserat = cf.cosserat_stiffness(params.replace(mu_macro=params.mu_e), R).T_w
        assert relaxed == cosserat

    def test_hadjesfandiari_matches_couple_stress(self):
        mu_macro, ell = 1 / 3, 0.2
        eta = ell ** 2 * mu_macro
        a1 = 8.0 * eta
        couple = cf.couple_stress_stiffness(mu_macro, 1.0, a1, 1.0, R)
        assert cf.hadjesfandiari_stiffness(mu_macro, ell, R).T_w == pytest.approx(couple.T_w, rel=1e-14)

    def test_strain_gradient_is_second_gradient_without_a2(self):
        a = cf.strain_gradient_stiffness(0.25, 1.0, 0.2, 0.5, R)
        b = cf.second_gradient_stiffness(0.25, 1.0, 0.2, 0.0, 0.5, R)
        assert a.T_w == b.T_w
        assert a.model is ModelKind.STRAIN_GRADIENT

    def test_second_gradient_value(self):
        model, params = _preset('second-gradient', Lc=1.0)
        t_w = cf.stiffness(model, params, R).T_w
        assert t_w == pytest.approx((0.25 + 2 * (1 / 5 + 3 / 6)) * IP, rel=1e-14)

    @pytest.mark.parametrize('alias,target', [
        ('MicroStretch', 'Cosserat'),
        ('ModifiedCoupleStress', 'IndeterminateCoupleStress'),
        ('MicroVoid', 'Cauchy'),
    ])
    def test_delegates(self, alias, target):
        _, params = _preset('cosserat', Lc=0.7)
        a = cf.stiffness(alias, params, R)
        b = cf.stiffness(target, params, R)
        assert a.T_w == b.T_w
        assert a.model.value == alias

    def test_symmetric_stress_branch(self):
        model, params = _preset('relaxed-vary-muc', Lc=1.0)
        direct = cf.relaxed_micromorphic_mu_c_zero(params, R)
        assert cf.stiffness(model, params, R).T_w == pytest.approx(direct.T_w, rel=1e-14)

    def test_unknown_model(self):
        with pytest.raises(UnsupportedModelError):
            cf.stiffness('Foo', MaterialParameters(mu_macro=1.0), R)


class TestCurves:

    def test_grid_must_be_sorted(self):
        model, params = _preset('cosserat')
        with pytest.raises(DomainError):
            cf.stiffness_curve(model, params, R, [1.0, 0.1])

    def test_negative_length_rejected(self):
        model, params = _preset('cosserat')
        with pytest.raises(ParameterDomainError):
            cf.stiffness_curve(model, params, R, [-1.0, 1.0])

    def test_failing_point_is_reported(self):
        _, params = _preset('cosserat', a1=0.0)
        with pytest.raises(GridPointError) as info:
            cf.stiffness_curve('Cosserat', params, R, [0.1, 1.0])
        assert info.value.index == 0

    def test_threads_give_identical_results(self):
        model, params = _preset('relaxed')
        grid = np.logspace(-2, 2, 17)
        serial = cf.stiffness_curve(model, params, R, grid)
        pooled = cf.stiffness_curve(model, params, R, grid, max_workers=4)
        assert [t.T_w for t in serial] == [t.T_w for t in pooled]

    def test_sensitivity_sweep(self):
        model, params = _preset('relaxed-sensitivity')
        curves = cf.sensitivity_sweep(model, params, R, [0.1, 1.0], 'mu_c', [0.1, 1.0])
        assert sorted(curves) == [0.1, 1.0]
        assert curves[1.0][1].T_w > curves[0.1][1].T_w

    def test_sensitivity_sweep_rejects_unknown_name(self):
        model, params = _preset('relaxed')
        with pytest.raises(ParameterDomainError):
            cf.sensitivity_sweep(model, params, R, [1.0], 'stiffness', [1.0])


class TestProfiles:

    def test_sum_and_difference(self):
        model, params = _preset('relaxed', Lc=1.0)
        profile = cf.radial_profiles(model, params, R, n_samples=21)
        np.testing.assert_allclose(profile.g1, 0.5 * (profile.g_p + profile.g_m))
        np.testing.assert_allclose(profile.g2, 0.5 * (profile.g_p - profile.g_m))
        assert profile.R == R
        assert list(profile.to_frame().columns) == ['r', 'g1', 'g2', 'g_p', 'g_m']

    def test_cosserat_profile_at_infinite_length(self):
        model, params = _preset('cosserat', Lc=math.inf)
        profile = cf.radial_profiles(model, params, R, n_samples=11)
        expected = 1.0 - 3 * params.a1 / (params.a1 + 8 * params.a3)
        np.testing.assert_allclose(profile.g_p, expected, rtol=1e-14)
        np.testing.assert_array_equal(profile.g_m, 0.0)

    def test_cosserat_profile_at_zero_length(self):
        model, params = _preset('cosserat', Lc=0.0)
        profile = cf.radial_profiles(model, params, R, n_samples=11)
        np.testing.assert_allclose(profile.g_p, 1.0)

    def test_micro_strain_profile_saturates(self):
        model, params = _preset('micro-strain', Lc=math.inf)
        profile = cf.radial_profiles(model, params, R, n_samples=11)
        np.testing.assert_allclose(profile.g_m, 0.0, atol=1e-15)

    @pytest.mark.parametrize('name', ['relaxed', 'cosserat', 'micromorphic', 'adhoc'])
    def test_first_derivative(self, name):
        model, params = _preset(name, Lc=0.5)
        profile = cf.radial_profiles(model, params, R, n_samples=11)
        r = np.array([0.2, 0.5, 0.9])
        h = 1e-6
        plus = profile.at(r + h)
        minus = profile.at(r - h)
        slope = profile.at(r, 1)
        for i in range(2):
            np.testing.assert_allclose(slope[i], (plus[i] - minus[i]) / (2 * h), rtol=1e-6, atol=1e-8)

    def test_regular_at_axis(self):
        model, params = _preset('relaxed', Lc=0.5)
        profile = cf.radial_profiles(model, params, R)
        slope_p, slope_m = profile.at(np.array([0.0]), 1)
        assert slope_p[0] == 0.0
        assert slope_m[0] == 0.0

    def test_needs_two_samples(self):
        model, params = _preset('relaxed')
        with pytest.raises(DomainError):
            cf.radial_profiles(model, params, R, n_samples=1)

    def test_cauchy_has_no_profile(self):
        with pytest.raises(UnsupportedModelError):
            cf.radial_profiles('Cauchy', MaterialParameters(mu_macro=1.0), R)


def test_polar_moment():
    assert polar_moment(2.0) == pytest.approx(8.0 * math.pi)
