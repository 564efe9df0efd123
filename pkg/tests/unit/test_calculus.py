"""
미분과 수반 유닛 테스트
"""
import numpy as np
import pytest

from app.core.calculus import (
    covariance_adjoint,
    covariance_derivative,
    linearize,
    misfit_and_gradient,
    nearfield_shape_derivative,
    residual,
    source_adjoint,
    source_derivative,
)
from app.core.errors import DimensionError, GeometryError
from app.core.forward import assemble_nearfield, covariance_signed, data_inner
from app.core.stochastics import build_weight
from app.models.shape import RadialPerturbation, StarShape
from app.utils.verification import check_adjoint_identity, check_gradient

N_BDY = 96


@pytest.fixture
def point(star_shape, small_grid, small_meas, rng):
    q = rng.uniform(0.5, 1.5, small_grid.n_src)
    return linearize(star_shape, q, small_grid, small_meas, 2.0, n_bdy=N_BDY, s=1.6)


class TestLinearize:
    def test_cached_matrices_have_expected_shapes(self, point, small_grid, small_meas):
        assert point.bdy_to_meas.shape == (small_meas.n_meas, N_BDY)
        assert point.src_to_bdy.shape == (N_BDY, small_grid.n_src)
        assert point.n_shape == 7
        assert point.s == 1.6

    def test_model_matches_forward_map(self, point):
        expected = covariance_signed(point.G.entries, point.q)
        np.testing.assert_allclose(point.model(), expected)

    def test_free_space_rejected(self, small_grid, small_meas):
        with pytest.raises(GeometryError):
            linearize(None, np.ones(small_grid.n_src), small_grid, small_meas, 2.0, n_bdy=N_BDY)

    def test_wrong_strength_length_rejected(self, star_shape, small_grid, small_meas):
        with pytest.raises(DimensionError):
            linearize(star_shape, np.ones(small_grid.n_src + 2), small_grid, small_meas, 2.0)


class TestShapeDerivative:
    """형상 미분과 유한 차분 비교"""

    def test_nearfield_derivative_matches_finite_difference(self, star_shape, point, small_grid, small_meas, rng):
        dr = 0.1 * rng.standard_normal(point.n_shape)
        h = 1e-5
        rho = star_shape.to_vector()
        plus = assemble_nearfield(StarShape.from_vector(rho + h * dr), small_grid, small_meas, 2.0, n_bdy=N_BDY)
        minus = assemble_nearfield(StarShape.from_vector(rho - h * dr), small_grid, small_meas, 2.0, n_bdy=N_BDY)
        fd = (plus.entries - minus.entries) / (2.0 * h)
        exact = nearfield_shape_derivative(point, dr)
        assert np.max(np.abs(fd - exact)) <= 1e-5 * np.max(np.abs(exact))

    def test_forward_difference_is_first_order(self, star_shape, point, small_grid, small_meas, rng):
        """ε ∈ {1e-3, 1e-4, 1e-5} 전진 차분 오차의 log-log 기울기 ≈ 1"""
        dr = 0.1 * rng.standard_normal(point.n_shape)
        rho = star_shape.to_vector()
        exact = nearfield_shape_derivative(point, dr)
        steps = np.array([1e-3, 1e-4, 1e-5])
        errors = []
        for eps in steps:
            moved = assemble_nearfield(StarShape.from_vector(rho + eps * dr), small_grid, small_meas, 2.0, n_bdy=N_BDY)
            errors.append(np.linalg.norm((moved.entries - point.G.entries) / eps - exact))
        slope = np.polyfit(np.log10(steps), np.log10(errors), 1)[0]
        assert slope == pytest.approx(1.0, abs=0.15)

    def test_uniform_perturbation_of_circle_is_radius_derivative(self, small_grid, small_meas):
        """원 반지름 a, ∂ρ ≡ 1 → d/da G (중심 차분)"""
        a, h = 0.8, 1e-5
        circle = StarShape.circle(a, degree=2)
        circle_point = linearize(circle, np.ones(small_grid.n_src), small_grid, small_meas, 2.0, n_bdy=N_BDY)
        uniform = RadialPerturbation(cos=[1.0, 0.0, 0.0], sin=[0.0, 0.0])
        plus = assemble_nearfield(StarShape.circle(a + h, degree=2), small_grid, small_meas, 2.0, n_bdy=N_BDY)
        minus = assemble_nearfield(StarShape.circle(a - h, degree=2), small_grid, small_meas, 2.0, n_bdy=N_BDY)
        fd = (plus.entries - minus.entries) / (2.0 * h)
        exact = nearfield_shape_derivative(circle_point, uniform)
        assert np.linalg.norm(fd - exact) <= 1e-5 * np.linalg.norm(exact)

    def test_accepts_radial_perturbation(self, point, rng):
        vec = rng.standard_normal(point.n_shape)
        np.testing.assert_allclose(
            nearfield_shape_derivative(point, RadialPerturbation.from_vector(vec)),
            nearfield_shape_derivative(point, vec),
        )

    def test_covariance_derivative_is_hermitian(self, point, rng):
        dC = covariance_derivative(point, rng.standard_normal(point.n_shape), rng.standard_normal(point.n_src))
        np.testing.assert_allclose(dC, dC.conj().T, atol=1e-15)

    def test_strength_part_is_linear_forward(self, point, rng):
        """∂ρ = 0 이면 C′(0, ∂q) = G M_∂q G^H"""
        dq = rng.standard_normal(point.n_src)
        np.testing.assert_allclose(
            covariance_derivative(point, np.zeros(point.n_shape), dq),
            source_derivative(point.G, dq),
            atol=1e-15,
        )

    def test_wrong_perturbation_length_rejected(self, point):
        with pytest.raises(DimensionError):
            nearfield_shape_derivative(point, np.zeros(point.n_shape + 1))
        with pytest.raises(DimensionError):
            covariance_derivative(point, np.zeros(point.n_shape), np.zeros(point.n_src - 1))


class TestAdjoint:
    """수반 항등식 ⟨C′h, K⟩ = ⟨h, C′*K⟩"""

    def test_adjoint_identity(self):
        result = check_adjoint_identity(n_triples=10)
        assert result.passed, result.line()

    def test_source_adjoint_identity(self, point, small_grid, rng):
        mu = point.surface_measure
        dq = rng.standard_normal(small_grid.n_src)
        K = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        lhs = data_inner(source_derivative(point.G, dq), K, mu)
        rhs = small_grid.inner(dq, source_adjoint(point.G, K, small_grid.measures, mu))
        assert lhs == pytest.approx(rhs, rel=1e-11)

    def test_adjoint_returns_perturbation_of_shape_degree(self, point, rng):
        K = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        dr_star, dq_star = covariance_adjoint(point, K)
        assert dr_star.degree == point.shape.degree
        assert dq_star.shape == (point.n_src,)

    def test_wrong_data_shape_rejected(self, point):
        with pytest.raises(DimensionError):
            covariance_adjoint(point, np.zeros((7, 7)))


class TestMisfit:
    """잔차 범함수와 기울기"""

    def test_zero_at_exact_data(self, point):
        observed = point.model()
        value, grad_dr, grad_dq = misfit_and_gradient(point, observed, build_weight(observed, 0.01))
        assert value == pytest.approx(0.0, abs=1e-20)
        np.testing.assert_allclose(grad_dr, 0.0, atol=1e-12)
        np.testing.assert_allclose(grad_dq, 0.0, atol=1e-12)

    def test_noise_term_shifts_residual(self, point):
        observed = point.model()
        np.testing.assert_allclose(residual(point, observed, noise=0.5), 0.5 * np.eye(8), atol=1e-15)

    def test_gradient_matches_finite_difference(self):
        result = check_gradient(n_directions=3)
        assert result.passed, result.line()
