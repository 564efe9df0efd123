"""
순방향 모듈 유닛 테스트
원천 격자, 근접장 행렬, 공분산 사상, 데이터 내적
"""
import numpy as np
import pytest

from app.core.errors import DimensionError, DomainError, GeometryError
from app.core.forward import (
    FREE_SPACE,
    MeasurementArray,
    assemble_nearfield,
    covariance_forward,
    data_inner,
    make_source_grid,
)
from app.core.specfun import fundamental_solution
from app.models.region import AnnulusRegion, Rectangle, RectangleRegion
from app.models.shape import StarShape
from app.utils.parallel import set_worker_count


class TestSourceGrid:
    """원천 격자 테스트"""

    def test_rectangle_cells(self, small_grid):
        assert small_grid.n_src == 9
        assert small_grid.area == pytest.approx(1.0 * 1.2)
        assert small_grid.points[0] == pytest.approx([2.0 + 1.0 / 6.0, -0.6 + 0.2])

    def test_annulus_cells(self):
        region = AnnulusRegion(r_inner=1.5, r_outer=2.5, n_r=6, n_theta=48)
        grid = make_source_grid(region)
        assert grid.n_src == 288
        assert grid.area == pytest.approx(np.pi * (2.5**2 - 1.5**2))

    def test_laplacian_annihilates_constants(self, small_grid):
        np.testing.assert_allclose(small_grid.laplacian @ np.ones(small_grid.n_src), 0.0, atol=1e-14)

    def test_annulus_laplacian_is_periodic(self):
        grid = make_source_grid(AnnulusRegion(r_inner=1.0, r_outer=2.0, n_r=2, n_theta=8))
        degrees = np.asarray((grid.laplacian != 0).sum(axis=1)).ravel() - 1
        # 각 셀: 각 방향 이웃 2 + 반경 방향 이웃 1
        assert np.all(degrees == 3)

    def test_h1_matrix_is_positive_definite(self, small_grid):
        eigenvalues = np.linalg.eigvalsh(small_grid.h1_matrix().toarray())
        assert eigenvalues[0] > 0.0

    def test_n_per_axis_override(self, small_region):
        assert make_source_grid(small_region, n_per_axis=5).n_src == 25

    def test_empty_region_rejected(self):
        with pytest.raises(GeometryError):
            make_source_grid(RectangleRegion(rectangles=[]))

    def test_overlap_with_obstacle_rejected(self, small_region):
        with pytest.raises(GeometryError):
            make_source_grid(small_region, obstacle=StarShape.circle(2.5))

    def test_outside_measurement_circle_rejected(self, small_region):
        with pytest.raises(GeometryError):
            make_source_grid(small_region, radius=3.0)


class TestMeasurementArray:
    def test_circle_points(self):
        meas = MeasurementArray.circle(5.0, 32)
        np.testing.assert_allclose(np.linalg.norm(meas.points, axis=1), 5.0)
        assert meas.surface_measure == pytest.approx(2 * np.pi * 5.0 / 32)

    def test_invalid_radius(self):
        with pytest.raises(GeometryError):
            MeasurementArray.circle(0.0, 8)


class TestAssembleNearfield:
    """근접장 행렬 조립 테스트"""

    def test_free_space_entries(self, small_grid, small_meas):
        G = assemble_nearfield(None, small_grid, small_meas, 2.0)
        expected = fundamental_solution(small_meas.points[2], small_grid.points[4], 2.0)
        assert G.entries[2, 4] == pytest.approx(expected * np.sqrt(small_grid.measures[4]))
        assert G.shape_hash == FREE_SPACE
        assert G.entries.shape == (8, 9)

    def test_obstacle_changes_entries(self, small_grid, small_meas, unit_circle):
        free = assemble_nearfield(None, small_grid, small_meas, 2.0)
        scattered = assemble_nearfield(unit_circle, small_grid, small_meas, 2.0, n_bdy=64)
        assert np.max(np.abs(free.entries - scattered.entries)) > 1e-3
        assert scattered.provenance()["shape"] == unit_circle.fingerprint()

    def test_thread_count_does_not_change_bits(self, small_meas, unit_circle):
        region = RectangleRegion(rectangles=[Rectangle(x_min=1.5, x_max=3.0, y_min=-1.0, y_max=1.0, nx=8, ny=9)])
        grid = make_source_grid(region, radius=4.0)
        try:
            set_worker_count(1)
            serial = assemble_nearfield(unit_circle, grid, small_meas, 2.0, n_bdy=64).entries
            set_worker_count(4)
            threaded = assemble_nearfield(unit_circle, grid, small_meas, 2.0, n_bdy=64).entries
        finally:
            set_worker_count(None)
        assert np.array_equal(serial, threaded)

    def test_source_inside_obstacle_rejected(self, small_grid, small_meas):
        with pytest.raises(GeometryError):
            assemble_nearfield(StarShape.circle(2.2), small_grid, small_meas, 2.0)


class TestCovarianceForward:
    """공분산 사상 테스트"""

    def test_hermitian_and_psd(self, small_grid, small_meas, rng):
        G = assemble_nearfield(None, small_grid, small_meas, 2.0)
        C = covariance_forward(G, rng.uniform(0.0, 2.0, small_grid.n_src))
        assert C.hermitian_defect() == 0.0
        assert C.min_eigenvalue() >= -1e-12 * np.max(np.abs(C.entries))

    def test_zero_strength_gives_zero(self, small_grid, small_meas):
        G = assemble_nearfield(None, small_grid, small_meas, 2.0)
        assert np.all(covariance_forward(G, np.zeros(small_grid.n_src)).entries == 0.0)

    def test_linear_in_strength(self, small_grid, small_meas, rng):
        G = assemble_nearfield(None, small_grid, small_meas, 2.0)
        q1 = rng.uniform(0, 1, small_grid.n_src)
        q2 = rng.uniform(0, 1, small_grid.n_src)
        combined = covariance_forward(G, 2.0 * q1 + 3.0 * q2).entries
        separate = 2.0 * covariance_forward(G, q1).entries + 3.0 * covariance_forward(G, q2).entries
        np.testing.assert_allclose(combined, separate, atol=1e-14)

    def test_negative_strength_rejected(self, small_grid, small_meas):
        G = assemble_nearfield(None, small_grid, small_meas, 2.0)
        q = np.ones(small_grid.n_src)
        q[0] = -0.1
        with pytest.raises(DomainError):
            covariance_forward(G, q)

    def test_wrong_length_rejected(self, small_grid, small_meas):
        G = assemble_nearfield(None, small_grid, small_meas, 2.0)
        with pytest.raises(DimensionError):
            covariance_forward(G, np.ones(small_grid.n_src + 1))


class TestDataInner:
    def test_scaled_frobenius(self):
        A = np.array([[1 + 1j, 0], [0, 2]])
        assert data_inner(A, A, 0.5) == pytest.approx(0.25 * (2 + 4))

    def test_real_part_only(self):
        A = np.array([[1j]])
        B = np.array([[1.0]])
        assert data_inner(A, B, 1.0) == 0.0
