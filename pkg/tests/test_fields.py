import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core import fields
from core.closed_form import radial_profiles
from core.errors import DomainError, SingularityError, UnsupportedModelError
from core.fields import Point
from core.materials import PRESETS, MaterialParameters

TWIST = 1.0
LC = 0.5
INTERIOR = Point.cylindrical(0.5, 0.7, 0.3)

angles = st.floats(min_value=0.0, max_value=2 * math.pi)


def _setup(name, Lc=LC, R=1.0):
    preset = PRESETS[name]
    params = preset['params'].replace(Lc=Lc)
    profile = radial_profiles(preset['model'], params, R, n_samples=51)
    return preset['model'], params, profile


class TestPoint:

    def test_cylindrical_round_trip(self):
        p = Point.cylindrical(1.3, 0.7, -2.0)
        assert p.to_cylindrical() == pytest.approx((1.3, 0.7, -2.0))
        assert p.as_array() == pytest.approx([1.3 * math.cos(0.7), 1.3 * math.sin(0.7), -2.0])

    def test_negative_radius(self):
        with pytest.raises(DomainError):
            Point.cylindrical(-1.0, 0.0, 0.0)

    def test_shift_drops_angle_hint(self):
        p = Point.cylindrical(1.0, 0.5, 0.0).shifted(2, 0.1)
        assert p.z == pytest.approx(0.1)
        assert p.phi == pytest.approx(0.5)


class TestTensorAlgebra:

    def test_anti_and_axl(self):
        v = np.array([1.0, -2.0, 3.0])
        b = np.array([0.5, 0.25, -1.0])
        np.testing.assert_allclose(fields.anti(v) @ b, np.cross(v, b))
        np.testing.assert_allclose(fields.axl(fields.anti(v)), v)

    def test_orthogonal_decomposition(self):
        P = np.random.default_rng(3).normal(size=(3, 3))
        parts = fields.orthogonal_decomposition(P)
        np.testing.assert_allclose(sum(parts), P, atol=1e-15)
        assert np.trace(parts[0]) == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(parts[1], -parts[1].T)

    @settings(max_examples=25)
    @given(angles, st.integers(min_value=0, max_value=2 ** 31))
    def test_torque_integrand_identity(self, phi, seed):
        moment = np.random.default_rng(seed).normal(size=(3, 3))
        lhs, rhs = fields.torque_integrand_identity(moment, phi)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_cylindrical_components_of_identity(self):
        np.testing.assert_allclose(fields.to_cylindrical_components(np.eye(3), 0.9), np.eye(3), atol=1e-15)


class TestChainRule:

    def test_gradient(self):
        r, phi = 1.3, 0.7
        c, s = math.cos(phi), math.sin(phi)
        # f = x1^2 x2 = r^3 cos^2 sin
        derivs = np.array([3 * r * r * c * c * s, r ** 3 * (c ** 3 - 2 * c * s * s), 0.0])
        point = Point.cylindrical(r, phi, 0.4)
        x1, x2 = point.x1, point.x2
        np.testing.assert_allclose(fields.chain_rule_gradient(derivs, point), [2 * x1 * x2, x1 * x1, 0.0],
                                   rtol=1e-13, atol=1e-13)

    def test_hessian_of_squared_radius(self):
        point = Point.cylindrical(0.8, 2.1, 0.0)
        first = np.array([2 * 0.8, 0.0, 0.0])
        second = np.zeros((3, 3))
        second[0, 0] = 2.0
        np.testing.assert_allclose(fields.chain_rule_hessian(first, second, point),
                                   np.diag([2.0, 2.0, 0.0]), atol=1e-14)

    def test_hessian_of_angle(self):
        point = Point.cylindrical(0.8, 2.1, 0.0)
        x1, x2 = point.x1, point.x2
        r4 = 0.8 ** 4
        expected = np.zeros((3, 3))
        expected[:2, :2] = [[2 * x1 * x2 / r4, (x2 * x2 - x1 * x1) / r4],
                            [(x2 * x2 - x1 * x1) / r4, -2 * x1 * x2 / r4]]
        result = fields.chain_rule_hessian(np.array([0.0, 1.0, 0.0]), np.zeros((3, 3)), point)
        np.testing.assert_allclose(result, expected, atol=1e-13)

    def test_singular_on_axis(self):
        with pytest.raises(SingularityError):
            fields.cylindrical_jacobian(Point.cartesian(0.0, 0.0, 1.0))

    def test_unsupported_order(self):
        with pytest.raises(DomainError):
            fields.cylindrical_jacobian(INTERIOR, chain_order=3)


class TestCauchyField:

    PARAMS = MaterialParameters(mu_macro=2.0)

    def test_displacement(self):
        point = Point.cartesian(0.3, 0.4, 2.0)
        np.testing.assert_allclose(fields.displacement(point, 0.5), [-0.4, 0.3, 0.0])

    def test_torque_integrand(self):
        point = Point.cylindrical(0.7, 1.1, 0.2)
        sigma, moment = fields.stress_and_moment('Cauchy', self.PARAMS, point, TWIST)
        assert fields.classical_torque_integrand(sigma, point) == pytest.approx(2.0 * 0.49, rel=1e-13)
        assert not moment.any()

    def test_energy_density(self):
        point = Point.cylindrical(0.6, 0.2, 0.0)
        assert fields.energy_density('Cauchy', self.PARAMS, point, TWIST) == pytest.approx(2.0 * 0.18)

    def test_equilibrium(self):
        report = fields.equilibrium_residual('Cauchy', self.PARAMS, INTERIOR, TWIST)
        assert report['force'] < 1e-6
        assert report['reduced'] == {}

    def test_traction_free(self):
        report = fields.boundary_residual('Cauchy', self.PARAMS, 1.0, TWIST)
        assert report['traction'] < 1e-12
        assert 'moment' not in report

    def test_field_state(self):
        point = Point.cartesian(0.3, 0.4, 2.0)
        state = fields.field_state('Cauchy', self.PARAMS, point, TWIST)
        np.testing.assert_allclose(state.u, [-0.8, 0.6, 0.0])
        np.testing.assert_allclose(state.Du + state.Du.T, 2 * fields.sym(state.Du))


class TestProfileFields:

    @pytest.mark.parametrize('name', ['relaxed', 'cosserat', 'micromorphic', 'micro-strain', 'adhoc'])
    def test_force_balance(self, name):
        model, params, profile = _setup(name)
        report = fields.equilibrium_residual(model, params, INTERIOR, TWIST, profile)
        assert report['force'] < 1e-6

    @pytest.mark.parametrize('name', ['relaxed', 'relaxed-vary-muc', 'cosserat', 'micromorphic',
                                      'micro-strain', 'adhoc'])
    def test_reduced_equations(self, name):
        model, params, profile = _setup(name)
        report = fields.equilibrium_residual(model, params, INTERIOR, TWIST, profile)
        assert report['reduced']
        for value in report['reduced'].values():
            assert value < 1e-8
        assert abs(report['eq1']) < 1e-8
        assert abs(report['eq2']) < 1e-8

    @pytest.mark.parametrize('name', ['relaxed', 'cosserat', 'micromorphic', 'micro-strain', 'adhoc'])
    def test_reduced_boundary_rows(self, name):
        model, params, profile = _setup(name)
        report = fields.boundary_residual(model, params, 1.0, TWIST, profile)
        assert report['traction'] < 1e-12
        assert max(report['reduced']) < 1e-10

    @pytest.mark.parametrize('name', ['cosserat', 'micromorphic', 'micro-strain'])
    def test_moment_free_surface(self, name):
        model, params, profile = _setup(name)
        report = fields.boundary_residual(model, params, 1.0, TWIST, profile, phi=1.9)
        assert report['moment'] < 1e-10

    def test_profile_is_required(self):
        _, params, _ = _setup('cosserat')
        with pytest.raises(DomainError):
            fields.kinematics('Cosserat', INTERIOR, TWIST, params=params)

    def test_infinite_length_scale_rejected(self):
        _, params, profile = _setup('cosserat')
        with pytest.raises(DomainError):
            fields.stress_and_moment('Cosserat', params.replace(Lc=math.inf), INTERIOR, TWIST, profile)

    def test_micro_distortion_needs_profile_model(self):
        _, _, profile = _setup('cosserat')
        with pytest.raises(UnsupportedModelError):
            fields.micro_distortion(INTERIOR, TWIST, profile, 'Cauchy')

    def test_cosserat_distortion_is_skew(self):
        _, _, profile = _setup('cosserat')
        P = fields.micro_distortion(INTERIOR, TWIST, profile, 'Cosserat')
        np.testing.assert_allclose(P, -P.T)

    def test_reduced_system_shape(self):
        _, params, _ = _setup('relaxed')
        system = fields.reduced_system('RelaxedMicromorphic', params, 1.0)
        assert system.unknowns() == ['g_p', 'g_m']
        assert system.boundary.shape == (2, 4)
        assert system.fixed == {}


class TestDiskAverage:

    def test_skew_average(self):
        total = fields.disk_average_gradient(1.0, 0.5, TWIST)
        expected = 0.5 * math.pi * np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        np.testing.assert_allclose(total, expected, atol=1e-8)

    def test_vanishes_at_origin_section(self):
        np.testing.assert_allclose(fields.disk_average_gradient(2.0, 0.0, TWIST), 0.0, atol=1e-8)

    def test_rejects_bad_radius(self):
        with pytest.raises(DomainError):
            fields.disk_average_gradient(0.0, 1.0, TWIST)
