"""
순방향 모듈
원천 격자, 측정 배열, 근접장 행렬 G_ln = |Ω_n|^{1/2} G_D(x_l, y_n) 조립과
공분산 순방향 사상 C(ρ, q) = G diag(q) G^H
"""
import hashlib
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse

from app.config import get_settings
from app.core.bie import AnySolver, get_solver
from app.core.errors import DimensionError, DomainError, GeometryError
from app.models.region import AnnulusRegion, RectangleRegion, region_with_resolution
from app.models.shape import StarShape
from app.utils.parallel import chunk_ranges, parallel_map

logger = logging.getLogger(__name__)

# 원천점 블록 크기 (스레드 수와 무관하게 고정해야 결과가 비트 단위로 같다)
SOURCE_BLOCK = 32
FREE_SPACE = "free-space"

Region = Union[RectangleRegion, AnnulusRegion]


def _digest(*arrays: NDArray) -> str:
    h = hashlib.md5()
    for arr in arrays:
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()[:12]


@dataclass(frozen=True)
class SourceGrid:
    """
    원천 영역 Ω의 셀 분할

    Attributes:
        points: 셀 중점 y_n, shape (N_src, 2)
        measures: 셀 넓이 |Ω_n|
        region: 영역 기술자
        laplacian: 셀 그래프 Laplacian (면 길이 / 중심 거리 가중치, Neumann형)
    """

    points: NDArray[np.float64]
    measures: NDArray[np.float64]
    region: Region
    laplacian: sparse.csr_matrix = field(repr=False)

    @property
    def n_src(self) -> int:
        return int(self.measures.size)

    @property
    def area(self) -> float:
        return float(np.sum(self.measures))

    def fingerprint(self) -> str:
        return _digest(self.points, self.measures)

    def inner(self, a: ArrayLike, b: ArrayLike) -> float:
        """원천 내적 Σ |Ω_n| a_n b_n"""
        return float(np.sum(self.measures * np.asarray(a) * np.asarray(b)))

    def h1_matrix(self) -> sparse.csr_matrix:
        """H¹ 이차형식 L + I_w"""
        return (self.laplacian + sparse.diags(self.measures)).tocsr()


@dataclass(frozen=True)
class MeasurementArray:
    """반지름 R 원 위의 등간격 측정점 x_l"""

    radius: float
    points: NDArray[np.float64]

    @classmethod
    def circle(cls, radius: float, n_meas: int) -> "MeasurementArray":
        if radius <= 0.0 or n_meas < 1:
            raise GeometryError(f"측정 원 설정이 잘못되었습니다: R={radius}, N_meas={n_meas}")
        t = 2.0 * np.pi * np.arange(n_meas) / n_meas
        return cls(radius=float(radius), points=radius * np.column_stack([np.cos(t), np.sin(t)]))

    @property
    def n_meas(self) -> int:
        return int(self.points.shape[0])

    @property
    def surface_measure(self) -> float:
        """측정점 당 호길이 μ = 2πR / N_meas"""
        return 2.0 * np.pi * self.radius / self.n_meas

    def fingerprint(self) -> str:
        return _digest(self.points)


@dataclass(frozen=True)
class NearFieldMatrix:
    """근접장 행렬과 출처 정보"""

    entries: NDArray[np.complex128]
    kappa: float
    shape_hash: str
    grid_hash: str
    meas_hash: str

    @property
    def n_meas(self) -> int:
        return int(self.entries.shape[0])

    @property
    def n_src(self) -> int:
        return int(self.entries.shape[1])

    def provenance(self) -> Dict[str, object]:
        return {
            "kappa": self.kappa,
            "shape": self.shape_hash,
            "grid": self.grid_hash,
            "measurement": self.meas_hash,
        }


@dataclass(frozen=True)
class CovarianceMatrix:
    """에르미트 N_meas × N_meas 공분산 행렬"""

    entries: NDArray[np.complex128]

    @property
    def n_meas(self) -> int:
        return int(self.entries.shape[0])

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])


def _rectangle_grid(region: RectangleRegion) -> tuple:
    points, measures = [], []
    rows, cols, weights = [], [], []
    offset = 0
    for rect in region.rectangles:
        dx = (rect.x_max - rect.x_min) / rect.nx
        dy = (rect.y_max - rect.y_min) / rect.ny
        xs = rect.x_min + (np.arange(rect.nx) + 0.5) * dx
        ys = rect.y_min + (np.arange(rect.ny) + 0.5) * dy
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        points.append(np.column_stack([gx.ravel(), gy.ravel()]))
        measures.append(np.full(rect.nx * rect.ny, dx * dy))

        index = offset + np.arange(rect.nx * rect.ny).reshape(rect.nx, rect.ny)
        # x 방향 이웃: 면 길이 dy, 중심 거리 dx
        rows.append(index[:-1, :].ravel())
        cols.append(index[1:, :].ravel())
        weights.append(np.full(index[:-1, :].size, dy / dx))
        rows.append(index[:, :-1].ravel())
        cols.append(index[:, 1:].ravel())
        weights.append(np.full(index[:, :-1].size, dx / dy))
        offset += rect.nx * rect.ny

    return (
        np.vstack(points),
        np.concatenate(measures),
        np.concatenate(rows),
        np.concatenate(cols),
        np.concatenate(weights),
    )


def _annulus_grid(region: AnnulusRegion) -> tuple:
    dr = (region.r_outer - region.r_inner) / region.n_r
    dtheta = 2.0 * np.pi / region.n_theta
    r_mid = region.r_inner + (np.arange(region.n_r) + 0.5) * dr
    t_mid = (np.arange(region.n_theta) + 0.5) * dtheta
    gr, gt = np.meshgrid(r_mid, t_mid, indexing="ij")

    points = np.asarray(region.center) + np.column_stack(
        [(gr * np.cos(gt)).ravel(), (gr * np.sin(gt)).ravel()]
    )
    # 극좌표 셀 넓이 r_mid Δr Δθ 는 정확하다
    measures = (gr * dr * dtheta).ravel()

    index = np.arange(region.n_r * region.n_theta).reshape(region.n_r, region.n_theta)
    r_face = region.r_inner + (np.arange(1, region.n_r)) * dr
    radial_w = np.repeat(r_face * dtheta / dr, region.n_theta)
    angular_w = np.repeat(dr / (r_mid * dtheta), region.n_theta)
    rows = np.concatenate([index[:-1, :].ravel(), index.ravel()])
    cols = np.concatenate([index[1:, :].ravel(), np.roll(index, -1, axis=1).ravel()])
    return points, measures, rows, cols, np.concatenate([radial_w, angular_w])


def _graph_laplacian(n: int, rows: NDArray, cols: NDArray, weights: NDArray) -> sparse.csr_matrix:
    adjacency = sparse.coo_matrix((weights, (rows, cols)), shape=(n, n))
    adjacency = (adjacency + adjacency.T).tocsr()
    degree = np.asarray(adjacency.sum(axis=1)).ravel()
    return (sparse.diags(degree) - adjacency).tocsr()


def make_source_grid(
    region: Region,
    n_per_axis: Optional[int] = None,
    obstacle: Optional[StarShape] = None,
    radius: Optional[float] = None,
) -> SourceGrid:
    """
    원천 영역을 중점 셀 격자로 분할

    Args:
        region: 직사각형 합집합 또는 환형 영역
        n_per_axis: 주어지면 각 직사각형을 n×n 셀로 분할
        obstacle: 주어지면 영역이 장애물과 겹치지 않는지 검사
        radius: 주어지면 영역이 측정 원 안에 있는지 검사

    Returns:
        SourceGrid
    """
    region = region_with_resolution(region, n_per_axis)
    if isinstance(region, RectangleRegion):
        if not region.rectangles:
            raise GeometryError("원천 영역이 비어 있습니다")
        points, measures, rows, cols, weights = _rectangle_grid(region)
    else:
        points, measures, rows, cols, weights = _annulus_grid(region)

    samples = np.vstack([points, region.outline_points()])
    if obstacle is not None and np.any(obstacle.contains(samples)):
        raise GeometryError("원천 영역이 장애물과 겹칩니다")
    if radius is not None and np.any(np.linalg.norm(samples, axis=1) >= radius):
        raise GeometryError(f"원천 영역이 측정 원(R={radius}) 밖으로 나갑니다")

    laplacian = _graph_laplacian(measures.size, rows, cols, weights)
    logger.debug(f"[Forward] 원천 격자 생성 - N_src={measures.size}, 넓이={np.sum(measures):.6f}")
    return SourceGrid(points=points, measures=measures, region=region, laplacian=laplacian)


def check_geometry(
    shape: Optional[StarShape], grid: SourceGrid, meas: MeasurementArray, margin: float = 0.0
) -> None:
    """원천점이 장애물 밖이고 측정 원이 장애물과 원천점을 모두 감싸는지 검사"""
    if np.any(np.linalg.norm(grid.points, axis=1) >= meas.radius):
        raise GeometryError(f"원천점이 측정 원(R={meas.radius}) 안에 있지 않습니다")
    if shape is None:
        return
    boundary = shape.boundary_points(256)
    if np.any(np.linalg.norm(boundary, axis=1) >= meas.radius):
        raise GeometryError(f"장애물이 측정 원(R={meas.radius}) 안에 있지 않습니다")
    if np.any(shape.contains(grid.points, margin=margin)):
        raise GeometryError("원천점이 장애물 내부에 있습니다")
    if np.any(shape.contains(meas.points, margin=margin)):
        raise GeometryError("측정점이 장애물 내부에 있습니다")


def assemble_nearfield(
    shape: Optional[StarShape],
    grid: SourceGrid,
    meas: MeasurementArray,
    kappa: float,
    n_bdy: Optional[int] = None,
    solver: Optional[AnySolver] = None,
) -> NearFieldMatrix:
    """
    근접장 행렬 조립

    shape가 None이면 장애물 없는 모드(G_D = Φ). 원천점 블록별 풀이는 하나의 분해를 공유한다.
    """
    check_geometry(shape, grid, meas)
    if solver is None:
        solver = get_solver(shape, kappa, n_bdy or get_settings().n_bdy)
    elif solver.kappa != kappa:
        raise DomainError(f"솔버 파수 {solver.kappa} != 요청 파수 {kappa}")

    blocks = chunk_ranges(grid.n_src, -(-grid.n_src // SOURCE_BLOCK))
    columns = parallel_map(
        lambda idx: solver.green_matrix(meas.points, grid.points[idx.start : idx.stop]),  # type: ignore[union-attr]
        blocks,
    )
    entries = np.hstack(columns) * np.sqrt(grid.measures)[None, :]

    logger.debug(
        f"[Forward] 근접장 조립 - {entries.shape[0]}×{entries.shape[1]}, κ={kappa:.4f}"
    )
    return NearFieldMatrix(
        entries=entries,
        kappa=float(kappa),
        shape_hash=FREE_SPACE if shape is None else shape.fingerprint(),
        grid_hash=grid.fingerprint(),
        meas_hash=meas.fingerprint(),
    )


def covariance_signed(entries: NDArray[np.complex128], q: ArrayLike) -> NDArray[np.complex128]:
    """부호 제한 없는 G diag(q) G^H (선형화 내부용), 에르미트 대칭화 포함"""
    q_arr = np.asarray(q, dtype=float)
    if q_arr.shape != (entries.shape[1],):
        raise DimensionError(f"q 길이 {q_arr.shape} != N_src {entries.shape[1]}")
    product = (entries * q_arr[None, :]) @ entries.conj().T
    return 0.5 * (product + product.conj().T)  # type: ignore[no-any-return]


def covariance_forward(G: NearFieldMatrix, q: ArrayLike) -> CovarianceMatrix:
    """공분산 순방향 사상 C = G diag(q) G^H (q ≥ 0)"""
    q_arr = np.asarray(q, dtype=float)
    if np.any(q_arr < 0.0):
        raise DomainError("원천 세기 q는 음수일 수 없습니다")
    return CovarianceMatrix(entries=covariance_signed(G.entries, q_arr))


def data_inner(A: ArrayLike, B: ArrayLike, surface_measure: float) -> float:
    """
    데이터 행렬의 이산 HS 내적 ⟨A, B⟩ = μ² Re Σ conj(A_ij) B_ij

    μ = 2πR/N_meas 는 측정 곡선 M × M 위 구적 가중치이며 순방향/역산 모듈이 함께 쓴다.
    """
    return float(surface_measure**2 * np.real(np.vdot(np.asarray(A), np.asarray(B))))
