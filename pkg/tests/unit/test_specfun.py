"""
원통함수와 Helmholtz 기본해 유닛 테스트
"""
import numpy as np
import pytest

from app.core.errors import DomainError
from app.core.specfun import (
    bessel_j,
    bessel_y,
    fundamental_solution,
    fundamental_solution_normal_derivative,
    hankel1,
)
from app.utils.verification import series_j, series_y0


class TestBesselFunctions:
    """Bessel 함수 정확도 테스트"""

    @pytest.mark.parametrize("x", [0.25, 0.5, 1.0, 2.0, 4.0])
    @pytest.mark.parametrize("order", [0, 1])
    def test_j_matches_power_series(self, order: int, x: float):
        """J_0, J_1 멱급수 일치"""
        assert bessel_j(order, x) == pytest.approx(series_j(order, x), rel=1e-12)

    @pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.0, 4.0])
    def test_y0_matches_power_series(self, x: float):
        """Y_0 급수 일치"""
        assert bessel_y(0, x) == pytest.approx(series_y0(x), rel=1e-11)

    def test_j0_at_origin_neighbourhood(self):
        """J_0(1e-8) ≈ 1"""
        assert bessel_j(0, 1e-8) == pytest.approx(1.0, abs=1e-15)

    def test_first_zero_of_j0(self):
        """J_0(2.404825557695773) ≈ 0"""
        assert abs(bessel_j(0, 2.404825557695773)) < 1e-12

    def test_wronskian(self):
        """J_0 Y_1 − J_1 Y_0 = −2/(πx)"""
        x = np.logspace(-1, 2, 200)
        lhs = bessel_j(0, x) * bessel_y(1, x) - bessel_j(1, x) * bessel_y(0, x)
        np.testing.assert_allclose(lhs, -2.0 / (np.pi * x), rtol=1e-10)

    def test_large_argument_asymptotics(self):
        """x = 500에서 J_0 ≈ √(2/πx) cos(x − π/4)"""
        x = 500.0
        approx = np.sqrt(2.0 / (np.pi * x)) * np.cos(x - np.pi / 4.0)
        assert abs(bessel_j(0, x) - approx) < 1e-4

    def test_hankel_is_j_plus_iy(self):
        x = np.array([0.3, 3.0, 30.0])
        np.testing.assert_allclose(hankel1(1, x), bessel_j(1, x) + 1j * bessel_y(1, x))

    def test_scalar_in_scalar_out(self):
        assert np.ndim(bessel_j(0, 1.0)) == 0
        assert bessel_j(0, np.array([1.0, 2.0])).shape == (2,)

    @pytest.mark.parametrize("x", [0.0, -1.0, np.nan])
    def test_invalid_argument_rejected(self, x: float):
        """x ≤ 0 또는 NaN → DomainError"""
        with pytest.raises(DomainError):
            bessel_y(0, x)

    def test_unsupported_order_rejected(self):
        with pytest.raises(DomainError):
            bessel_j(2, 1.0)


class TestFundamentalSolution:
    """기본해 테스트"""

    def test_symmetry(self):
        x = np.array([0.3, -1.2])
        y = np.array([2.0, 0.7])
        assert fundamental_solution(x, y, 2.0) == pytest.approx(fundamental_solution(y, x, 2.0))

    def test_known_value(self):
        """|x − y| = 1, κ = 1: Φ = (i/4) H_0(1)"""
        value = fundamental_solution([0.0, 0.0], [1.0, 0.0], 1.0)
        expected = 0.25j * (0.7651976865579666 + 1j * 0.08825696421567697)
        assert value == pytest.approx(expected, rel=1e-12)

    def test_coincident_points_rejected(self):
        with pytest.raises(DomainError):
            fundamental_solution([1.0, 1.0], [1.0, 1.0], 1.0)

    @pytest.mark.parametrize("kappa", [0.0, -1.0])
    def test_nonpositive_wavenumber_rejected(self, kappa: float):
        with pytest.raises(DomainError):
            fundamental_solution([0.0, 0.0], [1.0, 0.0], kappa)

    def test_normal_derivative_matches_finite_difference(self):
        """∂Φ/∂ν 중앙 차분 일치"""
        x = np.array([1.1, 0.4])
        y = np.array([-0.5, 0.9])
        nu = np.array([0.6, 0.8])
        kappa = 3.0
        h = 1e-6
        fd = (fundamental_solution(x + h * nu, y, kappa) - fundamental_solution(x - h * nu, y, kappa)) / (2 * h)
        exact = fundamental_solution_normal_derivative(x, y, nu, kappa)
        assert abs(fd - exact) <= 1e-6 * abs(exact)

    def test_broadcasting(self):
        targets = np.zeros((3, 1, 2))
        sources = np.array([[[1.0, 0.0], [0.0, 2.0]]])
        assert fundamental_solution(targets, sources, 1.0).shape == (3, 2)
