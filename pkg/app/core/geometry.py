"""
기하 모듈
별모양 경계의 Nyström 이산화, 매개화 미분 P′[ρ]와 그 수반, H^s 내적
"""
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import directed_hausdorff

from app.config import get_settings
from app.core.errors import DimensionError, GeometryError
from app.models.shape import RadialPerturbation, StarShape

MIN_BOUNDARY_NODES = 16


@dataclass(frozen=True)
class BoundaryMesh:
    """
    경계 ∂D의 등간격 각도 이산화

    Attributes:
        thetas: 각도 θ_i, shape (N,)
        points: 경계점 p(θ_i), shape (N, 2)
        normals: 바깥 방향 단위 법선 ν(θ_i), shape (N, 2)
        jacobians: |p′(θ_i)| (라디안당 길이)
        weights: 사다리꼴 가중치 2π/N
        tangents: p′(θ_i), shape (N, 2)
        accelerations: p″(θ_i), shape (N, 2)
    """

    thetas: NDArray[np.float64]
    points: NDArray[np.float64]
    normals: NDArray[np.float64]
    jacobians: NDArray[np.float64]
    weights: NDArray[np.float64]
    tangents: NDArray[np.float64]
    accelerations: NDArray[np.float64]

    @property
    def n_nodes(self) -> int:
        return int(self.thetas.size)

    @property
    def arc_weights(self) -> NDArray[np.float64]:
        """호길이 구적 가중치 |p′|·2π/N"""
        return self.jacobians * self.weights

    def arclength(self) -> float:
        return float(np.sum(self.arc_weights))

    def signed_area(self) -> float:
        """신발끈 공식 부호 면적 (반시계 방향이면 양수)"""
        x, y = self.points[:, 0], self.points[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def inner(self, f: ArrayLike, g: ArrayLike) -> float:
        """메시 내적 Σ f g |p′| 2π/N"""
        return float(np.sum(np.asarray(f) * np.asarray(g) * self.arc_weights))


def discretize(shape: StarShape, n_bdy: int) -> BoundaryMesh:
    """
    StarShape를 n_bdy개 등간격 노드로 이산화

    Args:
        shape: 별모양 형상
        n_bdy: 노드 수 (짝수, 16 이상)

    Returns:
        BoundaryMesh
    """
    if n_bdy < MIN_BOUNDARY_NODES or n_bdy % 2:
        raise GeometryError(f"n_bdy는 {MIN_BOUNDARY_NODES} 이상의 짝수여야 합니다: {n_bdy}")
    if shape.min_radius() <= 0.0:
        raise GeometryError("반경 함수 ρ(θ)가 검사 격자에서 양수가 아닙니다")

    thetas = 2.0 * np.pi * np.arange(n_bdy) / n_bdy
    rho = shape.radius(thetas)
    drho = shape.radius_derivative(thetas, 1)
    ddrho = shape.radius_derivative(thetas, 2)

    radial = np.column_stack([np.cos(thetas), np.sin(thetas)])
    angular = np.column_stack([-np.sin(thetas), np.cos(thetas)])

    points = shape.center_array + rho[:, None] * radial
    tangents = drho[:, None] * radial + rho[:, None] * angular
    accelerations = (ddrho - rho)[:, None] * radial + 2.0 * drho[:, None] * angular
    jacobians = np.sqrt(rho**2 + drho**2)
    # 반시계 방향 곡선의 접선을 시계 방향으로 90° 회전하면 바깥 법선
    normals = np.column_stack([tangents[:, 1], -tangents[:, 0]]) / jacobians[:, None]

    return BoundaryMesh(
        thetas=thetas,
        points=points,
        normals=normals,
        jacobians=jacobians,
        weights=np.full(n_bdy, 2.0 * np.pi / n_bdy),
        tangents=tangents,
        accelerations=accelerations,
    )


def trig_basis(thetas: ArrayLike, degree: int) -> NDArray[np.float64]:
    """계수 벡터 [a_0..a_K, b_1..b_K]를 각도 값으로 보내는 행렬, shape (N, 2K+1)"""
    t = np.asarray(thetas, dtype=float)
    k = np.arange(1, degree + 1)
    phase = np.outer(t, k)
    return np.hstack([np.ones((t.size, 1)), np.cos(phase), np.sin(phase)])


def _coefficients(dr: Union[RadialPerturbation, ArrayLike]) -> NDArray[np.float64]:
    if isinstance(dr, RadialPerturbation):
        return dr.to_vector()
    return np.asarray(dr, dtype=float)


def normal_speed_matrix(shape: StarShape, mesh: BoundaryMesh) -> NDArray[np.float64]:
    """∂ρ 계수를 노드별 h·ν = ∂ρ ρ / |p′| 로 보내는 행렬, shape (N, 2K+1)"""
    rho = shape.radius(mesh.thetas)
    return (rho / mesh.jacobians)[:, None] * trig_basis(mesh.thetas, shape.degree)


def normal_speed(
    shape: StarShape, dr: Union[RadialPerturbation, ArrayLike], mesh: BoundaryMesh
) -> NDArray[np.float64]:
    """
    경계 변위 h = ∂ρ x̂ 의 법선 성분 h·ν

    ν·x̂ = ρ / √(ρ² + ρ′²) 이므로 결과는 ∂ρ ρ / |p′|
    """
    coeffs = _coefficients(dr)
    if coeffs.size != 2 * shape.degree + 1:
        raise DimensionError(
            f"섭동 계수 개수 {coeffs.size} != 형상 계수 개수 {2 * shape.degree + 1}"
        )
    return normal_speed_matrix(shape, mesh) @ coeffs  # type: ignore[no-any-return]


def normal_speed_adjoint(
    shape: StarShape,
    mesh: BoundaryMesh,
    w: ArrayLike,
    s: Optional[float] = None,
) -> RadialPerturbation:
    """
    normal_speed의 수반 (메시 내적 ↔ H^s 내적)

    ⟨normal_speed(∂ρ), w⟩_mesh = ⟨∂ρ, normal_speed_adjoint(w)⟩_{H^s}
    """
    values = np.asarray(w, dtype=float)
    if values.shape != (mesh.n_nodes,):
        raise DimensionError(f"노드 값 개수 {values.shape} != ({mesh.n_nodes},)")
    return RadialPerturbation.from_vector(normal_speed_adjoint_vector(shape, mesh, values, s))


def normal_speed_adjoint_vector(
    shape: StarShape, mesh: BoundaryMesh, w: NDArray[np.float64], s: Optional[float] = None
) -> NDArray[np.float64]:
    """Gram 적용 전 E^T(ρ w 2π/N)를 H^s Riesz 표현으로 변환한 계수 벡터"""
    rho = shape.radius(mesh.thetas)
    # |p′|는 호길이 가중치와 상쇄된다
    pre_gram = trig_basis(mesh.thetas, shape.degree).T @ (rho * mesh.weights * w)
    return pre_gram / sobolev_weights(shape.degree, s)  # type: ignore[no-any-return]


def sobolev_weights(max_degree: int, s: Optional[float] = None) -> NDArray[np.float64]:
    """[a_0..a_K, b_1..b_K] 배치의 대각 가중치 (1 + k²)^s"""
    exponent = get_settings().sobolev_s if s is None else s
    if exponent < 0:
        raise GeometryError(f"Sobolev 지수는 음수일 수 없습니다: s={exponent}")
    k = np.arange(0, max_degree + 1, dtype=float)
    cos_weights = (1.0 + k**2) ** exponent
    return np.concatenate([cos_weights, cos_weights[1:]])


def sobolev_gram(max_degree: int, s: Optional[float] = None) -> NDArray[np.float64]:
    """계수 공간의 대각 H^s Gram 행렬"""
    return np.diag(sobolev_weights(max_degree, s))


def sobolev_inner(a: ArrayLike, b: ArrayLike, s: Optional[float] = None) -> float:
    """계수 벡터 간 H^s 내적"""
    a_vec = _coefficients(a)
    b_vec = _coefficients(b)
    degree = (a_vec.size - 1) // 2
    return float(np.sum(a_vec * b_vec * sobolev_weights(degree, s)))


def hausdorff_distance(a: StarShape, b: StarShape, n_points: int = 1024) -> float:
    """두 경계 곡선 사이의 Hausdorff 거리"""
    pa = a.boundary_points(n_points)
    pb = b.boundary_points(n_points)
    return max(directed_hausdorff(pa, pb)[0], directed_hausdorff(pb, pa)[0])
