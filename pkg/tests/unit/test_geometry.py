"""
경계 이산화와 형상 공간 유닛 테스트
"""
import numpy as np
import pytest
from pydantic import ValidationError

from app.core.errors import DimensionError, GeometryError
from app.core.geometry import (
    discretize,
    hausdorff_distance,
    normal_speed,
    normal_speed_adjoint,
    sobolev_gram,
    sobolev_inner,
    sobolev_weights,
)
from app.models.shape import RadialPerturbation, StarShape


class TestStarShape:
    """별모양 형상 모델 테스트"""

    def test_circle_radius(self):
        shape = StarShape.circle(1.5, degree=3)
        np.testing.assert_allclose(shape.radius(np.linspace(0, 2 * np.pi, 7)), 1.5)
        assert shape.degree == 3

    def test_vector_round_trip_keeps_center(self, star_shape):
        moved = StarShape.from_vector(star_shape.to_vector(), center=(0.5, -0.2))
        assert moved.center == (0.5, -0.2)
        np.testing.assert_allclose(moved.to_vector(), star_shape.to_vector())

    def test_json_alias_layout(self, star_shape):
        payload = star_shape.model_dump(by_alias=True)
        assert set(payload) == {"center", "cos", "sin"}
        assert StarShape.model_validate(payload) == star_shape

    @pytest.mark.parametrize(
        "cos,sin",
        [
            ([-1.0], []),  # 음의 반지름
            ([0.5, 0.8], [0.0]),  # ρ(π) < 0
            ([1.0, 0.0], []),  # sin 계수 개수 불일치
        ],
    )
    def test_invalid_shapes_rejected(self, cos, sin):
        with pytest.raises(ValidationError):
            StarShape(cos=cos, sin=sin)

    def test_degree_cap(self):
        with pytest.raises(ValidationError):
            StarShape.circle(1.0, degree=64)

    def test_contains(self, unit_circle):
        inside = unit_circle.contains(np.array([[0.0, 0.0], [0.99, 0.0], [1.01, 0.0]]))
        assert inside.tolist() == [True, True, False]

    def test_perturbed_adds_coefficients(self, star_shape):
        dr = RadialPerturbation.from_vector(np.full(7, 0.01))
        moved = star_shape.perturbed(dr, step=0.5)
        np.testing.assert_allclose(moved.to_vector(), star_shape.to_vector() + 0.005)

    def test_fingerprint_changes_with_coefficients(self, star_shape, unit_circle):
        assert star_shape.fingerprint() != unit_circle.fingerprint()
        assert StarShape.circle(1.0).fingerprint() == unit_circle.fingerprint()


class TestDiscretize:
    """경계 메시 테스트"""

    def test_circle_geometry(self):
        mesh = discretize(StarShape.circle(2.0), 64)
        assert mesh.n_nodes == 64
        np.testing.assert_allclose(mesh.jacobians, 2.0)
        np.testing.assert_allclose(mesh.normals, mesh.points / 2.0, atol=1e-14)
        assert mesh.arclength() == pytest.approx(4.0 * np.pi, rel=1e-14)

    def test_area_is_positive_for_counterclockwise(self, star_shape):
        mesh = discretize(star_shape, 256)
        # ∫½ρ² dθ = π(1 + 0.3²/2 + 0.2²/2)
        assert mesh.signed_area() == pytest.approx(np.pi * (1.0 + 0.045 + 0.02), rel=1e-3)

    def test_normals_are_unit_and_orthogonal_to_tangents(self, star_shape):
        mesh = discretize(star_shape, 96)
        np.testing.assert_allclose(np.linalg.norm(mesh.normals, axis=1), 1.0)
        np.testing.assert_allclose(np.sum(mesh.normals * mesh.tangents, axis=1), 0.0, atol=1e-14)

    def test_normals_point_outward(self, star_shape):
        mesh = discretize(star_shape, 64)
        assert np.all(np.sum(mesh.normals * mesh.points, axis=1) > 0.0)

    @pytest.mark.parametrize("n_bdy", [8, 15, 65])
    def test_invalid_node_count(self, star_shape, n_bdy: int):
        """16 미만 또는 홀수 → GeometryError"""
        with pytest.raises(GeometryError):
            discretize(star_shape, n_bdy)


class TestNormalSpeed:
    """법선 속도와 수반 테스트"""

    def test_circle_normal_speed_equals_perturbation(self, unit_circle):
        shape = unit_circle.with_degree(2)
        mesh = discretize(shape, 32)
        dr = np.array([0.1, 0.2, 0.0, 0.0, -0.3])
        expected = 0.1 + 0.2 * np.cos(mesh.thetas) - 0.3 * np.sin(2 * mesh.thetas)
        np.testing.assert_allclose(normal_speed(shape, dr, mesh), expected, atol=1e-14)

    def test_adjoint_identity(self, star_shape, rng):
        """⟨h·ν, w⟩_mesh = ⟨∂ρ, adjoint(w)⟩_{H^s}"""
        mesh = discretize(star_shape, 64)
        for _ in range(5):
            dr = rng.standard_normal(7)
            w = rng.standard_normal(64)
            lhs = mesh.inner(normal_speed(star_shape, dr, mesh), w)
            rhs = sobolev_inner(dr, normal_speed_adjoint(star_shape, mesh, w, s=1.6), s=1.6)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-14)

    def test_dimension_mismatch(self, star_shape):
        mesh = discretize(star_shape, 32)
        with pytest.raises(DimensionError):
            normal_speed(star_shape, np.zeros(5), mesh)
        with pytest.raises(DimensionError):
            normal_speed_adjoint(star_shape, mesh, np.zeros(31))


class TestSobolev:
    """H^s Gram 테스트"""

    def test_weights_layout(self):
        np.testing.assert_allclose(sobolev_weights(2, 1.0), [1.0, 2.0, 5.0, 2.0, 5.0])

    def test_zero_exponent_is_identity(self):
        np.testing.assert_allclose(sobolev_gram(3, 0.0), np.eye(7))

    def test_negative_exponent_rejected(self):
        with pytest.raises(GeometryError):
            sobolev_weights(3, -0.5)

    def test_inner_is_symmetric_positive(self, rng):
        a = rng.standard_normal(9)
        b = rng.standard_normal(9)
        assert sobolev_inner(a, b, 1.6) == pytest.approx(sobolev_inner(b, a, 1.6))
        assert sobolev_inner(a, a, 1.6) > 0.0


class TestHausdorff:
    def test_concentric_circles(self):
        assert hausdorff_distance(StarShape.circle(1.0), StarShape.circle(1.3)) == pytest.approx(0.3)

    def test_identical_shapes(self, star_shape):
        assert hausdorff_distance(star_shape, star_shape) == pytest.approx(0.0, abs=1e-15)
